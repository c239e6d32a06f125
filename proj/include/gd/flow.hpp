#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gd/partition.hpp"
#include "gd/state_space.hpp"

namespace gd {

class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Demand { uniform, weighted };
const char* demand_name(Demand d);

// Reversible weighted graph that carries flows. Directed edge 2e runs
// edges[e].first -> edges[e].second, 2e+1 the other way.
struct FlowGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> pi;  // normalized
  std::vector<double> Q;   // per undirected edge, pi(u) P(u, v)
  std::vector<std::vector<int>> adj, adj_edge;

  int m() const { return static_cast<int>(edges.size()); }
  int directed(int u, int v) const;  // -1 when not adjacent
  int tail(int d) const { return d & 1 ? edges[d >> 1].second : edges[d >> 1].first; }
  int head(int d) const { return d & 1 ? edges[d >> 1].first : edges[d >> 1].second; }
};

FlowGraph make_flow_graph(int n, std::vector<std::pair<int, int>> edges, std::vector<double> pi,
                          std::vector<double> Q);
FlowGraph flow_graph(const StateSpace& sp);
// Connected random graph with random pi and reversible capacities.
FlowGraph random_flow_graph(int n, std::uint64_t seed);

using SparseFlow = std::vector<std::pair<int, double>>;  // (directed edge, amount)

class Scheme;  // router producing one unit flow per ordered pair

struct Flow {
  std::shared_ptr<const FlowGraph> graph;
  Demand demand = Demand::uniform;
  std::string construction;
  Variant variant = Variant::nonhier;
  std::vector<int> separator;       // top-level X (state-space flows)
  std::vector<double> load;         // aggregate per directed edge
  double demand_total = 0;
  long long commodities = 0;
  bool exact = false;               // per-commodity checks ran
  double max_conservation_error = 0;  // per unit commodity, from verified pieces
  long long materialized = 0;       // commodities also expanded edge by edge
  double max_materialized_error = 0;
  double aggregate_mismatch = 0;    // |sum of expanded commodities - load|
  double aggregate_divergence = 0;  // max net outflow of the aggregate
  int depth = 0;                    // recursion depth of the construction
  std::shared_ptr<Scheme> scheme;

  bool valid(double tol = 1e-9) const;
};

struct FlowOptions {
  Demand demand = Demand::uniform;
  double overlap_floor = 0.25;
  int exact_cap = kDefaultExactCap;   // per-commodity checks up to this many states
  int materialize_cap = 120;          // full edge-by-edge expansion up to this many states
  int state_cap = 20000;              // FlowError above this (all pairs are planned)
};

// Unit flow of commodity (s, t).
SparseFlow commodity_flow(const Flow& f, int s, int t);
// max over vertices of |net outflow - (1[v = s] - 1[v = t])|
double conservation_error(const FlowGraph& g, const SparseFlow& f, int s, int t);

// Uniform: max directed load. Weighted: max load / Q; throws FlowError when a
// zero-capacity edge carries load.
double congestion(const Flow& f);

Flow shortest_path_flow(const FlowGraph& g, Demand d, const FlowOptions& o = {});
// Routes (h1,j1) -> (h2,j2) along H in fiber j1, then along J in fiber h2.
// Both factors must use the same demand model.
Flow product_flow(const Flow& H, const Flow& J, const FlowOptions& o = {});

// The space must outlive the returned flow's scheme only for the call; flows
// own their graph.
Flow build_flow_nonhier(const StateSpace& sp, const ClassPartition& part, const FlowOptions& o = {});
Flow build_flow_hier(const StateSpace& sp, const ClassPartition& part, const TraceOrder& order,
                     const FlowOptions& o = {});
Flow build_flow_relaxed(const StateSpace& sp, const ClassPartition& part, const std::vector<SubclassCover>& covers,
                        Variant v, const FlowOptions& o = {});
// Separator from the min-fill decomposition, variant by chain kind.
Flow build_flow(const StateSpace& sp, const FlowOptions& o = {});
Flow build_flow(const StateSpace& sp, Variant v, const FlowOptions& o = {});
// Same separator and variant on a weighted space, with pi(s) pi(t) demands and
// Q-proportional boundary shares. Throws FlowError for lambda <= 0.
Flow reweight_flow(const Flow& f, const StateSpace& sp, const FlowOptions& o = {});

// Relative residuals of the class weight factorizations over a certified
// product: pi_G(s) = pi_C(a, b) pi_G(C), and for a move inside one factor
// Q_G(e) = Q_C(e) pi_G(C) (s_A + s_B) / s_G, where Q_C scales the factor edge
// weight by the other factor's pi and s_A / (s_A + s_B), and s_* are site
// normalizers. Edge identities are skipped for maximal kinds (no site form).
struct WeightFactorCheck {
  double vertex_residual = 0;
  double edge_residual = 0;
  long long vertices = 0, edges = 0;
  bool edges_checked = false;
};
WeightFactorCheck weight_factorization(const StateSpace& sp, const ProductCertificate& cert);

// One line per commodity: "s t d:amount ...". Exact mode only.
std::string dump_flow(const Flow& f);

}  // namespace gd
