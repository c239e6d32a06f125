#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gd {

enum class Role : std::uint8_t { normal, steiner, forbidden };

const char* role_name(Role r);
Role parse_role(const std::string& s);  // throws std::invalid_argument

struct TreeDecomposition {
  std::vector<std::vector<int>> bags;  // each bag sorted
  std::vector<std::pair<int, int>> tree_edges;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simple undirected graph with dense 0-based vertices and canonical edges
// (u < v, sorted lexicographically). Immutable once built.
class Graph {
 public:
  Graph() = default;
  // Throws GraphError on self loops, duplicate edges or out-of-range vertices.
  static Graph from_edges(int n, std::vector<std::pair<int, int>> edges);

  int n() const { return n_; }
  int m() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const { return adj_[v]; }
  // Edge ids aligned with neighbors(v).
  const std::vector<int>& incident_edges(int v) const { return adj_edges_[v]; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  int max_degree() const;
  bool adjacent(int u, int v) const { return edge_id(u, v) >= 0; }
  int edge_id(int u, int v) const;  // -1 when absent

  // Annotations. Accessors apply the documented defaults.
  const std::optional<std::vector<int>>& b_values() const { return b_; }
  const std::optional<std::vector<std::vector<int>>>& color_lists() const { return lists_; }
  const std::optional<std::vector<Role>>& roles() const { return roles_; }
  int b(int v) const { return b_ ? (*b_)[v] : 1; }
  Role role(int v) const { return roles_ ? (*roles_)[v] : Role::normal; }
  // Sorted list of allowed colors; the full [q] when no lists are attached.
  std::vector<int> color_list(int v, int q) const;

  void set_b_values(std::vector<int> b);
  void set_color_lists(std::vector<std::vector<int>> lists);
  void set_roles(std::vector<Role> roles);
  void clear_b_values() { b_.reset(); }
  void clear_color_lists() { lists_.reset(); }
  void clear_roles() { roles_.reset(); }

  // Decomposition carried from construction (partial_k_tree, path).
  const std::optional<TreeDecomposition>& construction_decomposition() const { return td_; }
  void set_construction_decomposition(TreeDecomposition td) { td_ = std::move(td); }

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::vector<int>> adj_edges_;
  std::optional<std::vector<int>> b_;
  std::optional<std::vector<std::vector<int>>> lists_;
  std::optional<std::vector<Role>> roles_;
  std::optional<TreeDecomposition> td_;
};

// Subgraph with the maps back to the parent graph. Annotations are restricted.
struct Subgraph {
  Graph graph;
  std::vector<int> vertex_of;  // sub vertex -> parent vertex
  std::vector<int> edge_of;    // sub edge -> parent edge
};

Subgraph induced_subgraph(const Graph& g, const std::vector<int>& vertices);
// Keeps exactly the listed parent edges; their endpoints must be in `vertices`.
Subgraph edge_subgraph(const Graph& g, const std::vector<int>& vertices,
                       const std::vector<int>& edge_ids);

// ---- edge-list text format ----

enum class ParseErrorKind {
  malformed_header,
  malformed_line,
  self_loop,
  duplicate_edge,
  vertex_out_of_range,
  color_out_of_range,
  edge_count_mismatch,
  unknown_section,
  bad_role,
  io_error,
};

const char* parse_error_kind_name(ParseErrorKind k);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, int line, const std::string& what);
  ParseErrorKind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  ParseErrorKind kind_;
  int line_;
};

// When q is given, list colors must lie in [1, q]; otherwise any color >= 1 passes.
Graph parse_graph(const std::string& text, std::optional<int> q = std::nullopt);
Graph load_graph(const std::string& path, std::optional<int> q = std::nullopt);
std::string format_graph(const Graph& g);
void save_graph(const Graph& g, const std::string& path);

// ---- generators ----

enum class Family { path, cycle, complete, random_tree, partial_k_tree, grid };

Family parse_family(const std::string& s);  // throws std::invalid_argument
const char* family_name(Family f);

// Deterministic in (family, n, seed, k). grid is n rows by k columns (k <= 0
// means square). partial_k_tree carries its construction decomposition.
Graph generate(Family family, int n, std::uint64_t seed = 0, int k = 0);

}  // namespace gd
