#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gd/graph.hpp"

namespace gd {

struct DecompositionReport {
  bool is_tree = true;       // tree_edges form a tree over the bags
  bool vertex_cover = true;  // every vertex lies in some bag
  bool edge_cover = true;    // every edge lies in some bag
  bool connected = true;     // bags holding each vertex form a subtree
  std::optional<int> missing_vertex;
  std::optional<std::pair<int, int>> missing_edge;
  std::optional<int> disconnected_vertex;
  std::string tree_problem;

  bool ok() const { return is_tree && vertex_cover && edge_cover && connected; }
};

DecompositionReport validate_decomposition(const Graph& g, const TreeDecomposition& td);

// Largest bag size minus one. Throws std::invalid_argument on an empty decomposition.
int decomposition_width(const TreeDecomposition& td);

// Min-fill elimination (ties: fewer neighbors, then lower index). Bags contained
// in an adjacent bag are merged away. Components are joined into one tree.
TreeDecomposition compute_decomposition(const Graph& g);

// Text form: "k", k bag lines, k-1 tree-edge lines.
std::string format_decomposition(const TreeDecomposition& td);
TreeDecomposition parse_decomposition(const std::string& text);

struct Separator {
  std::vector<int> X, A, B;
  int max_component = 0;  // largest component of G - X
};

// Candidates are the bags and the intersections of adjacent bags. Among those
// whose components all have at most 2|V|/3 vertices, the smallest X wins, then
// the smallest largest component, then the lowest candidate index (the empty
// set comes first, then bags, then adhesions in tree-edge order). Components go
// largest first into the lighter side.
Separator find_balanced_separator(const Graph& g, const TreeDecomposition& td);

// A and B for a given X by the same grouping rule.
Separator separator_from(const Graph& g, std::vector<int> X);

struct SeparatorNode {
  std::vector<int> vertices;  // of the original graph, sorted
  std::vector<int> X, A, B;   // original ids, sorted
  int child_a = -1, child_b = -1;
  int depth = 0;              // height of the subtree; 0 for leaves
  bool leaf() const { return child_a < 0; }
};

class SeparatorTree {
 public:
  const SeparatorNode& root() const { return nodes_[0]; }
  const SeparatorNode& node(int i) const { return nodes_[i]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int depth() const { return nodes_[0].depth; }
  // A u X and B u X, used by chains whose separator vertices re-enter subproblems.
  static std::vector<int> augmented_a(const SeparatorNode& nd);
  static std::vector<int> augmented_b(const SeparatorNode& nd);

 private:
  friend SeparatorTree build_separator_tree(const Graph& g);
  std::vector<SeparatorNode> nodes_;
};

// Leaves have at most one vertex. Both sides always get a child node.
SeparatorTree build_separator_tree(const Graph& g);

// ceil(log_{3/2} n) + 1; the guaranteed depth bound.
int separator_depth_bound(int n);

// Components of g restricted to vertices with keep[v] != 0, each sorted.
std::vector<std::vector<int>> components(const Graph& g, const std::vector<char>& keep);

}  // namespace gd
