#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gd/decomposition.hpp"
#include "gd/state_space.hpp"

namespace gd {

// Sites whose values form the trace: X for vertex chains, edges inside X for
// b-edge covers, edges touching X for (maximal) b-matchings.
std::vector<int> trace_sites(const Graph& g, ChainKind kind, const std::vector<int>& X);

struct ClassPartition {
  Separator sep;
  std::vector<int> trace_sites;
  std::vector<State> traces;               // per class, sorted
  std::vector<std::vector<int>> members;   // sorted state indices
  std::vector<int> class_of;               // per state
  std::vector<std::vector<int>> intra;     // edge ids inside each class
  std::map<std::pair<int, int>, std::vector<int>> boundary;  // (c1 < c2) -> edge ids
  std::vector<std::vector<int>> class_adj;                   // adjacent classes, sorted

  int size() const { return static_cast<int>(traces.size()); }
  const std::vector<int>& between(int a, int b) const;
  std::string label(int c) const;
};

// Throws std::invalid_argument when (X, A, B) is not a separation of the graph.
ClassPartition partition_by_trace(const StateSpace& sp, const Separator& sep);
ClassPartition partition_by_trace(const StateSpace& sp, const std::vector<int>& X);

// One factor of a product decomposition: a chain on a smaller graph and the map
// from its sites to the original sites (-1 for auxiliary sites that are always 0).
struct FactorSpec {
  Graph graph;
  ChainParams params;
  std::vector<int> site_map;
};

struct ProductCertificate {
  std::string label;
  std::vector<int> members;                    // certified state indices, sorted
  FactorSpec spec_a, spec_b;
  StateSpace space_a, space_b;
  std::vector<std::pair<int, std::uint8_t>> fixed;  // original site -> value
  std::vector<int> state_of;                   // a * |F_B| + b -> state index (-1 if missing)
  std::vector<std::pair<int, int>> pair_of;    // per member -> (a, b)
  bool projection_ok = false;
  bool bijection_ok = false;
  bool edges_ok = false;
  long long intra_edges = 0, product_edges = 0;
  std::string witness;
  bool ok() const { return projection_ok && bijection_ok && edges_ok; }
};

// Certificate for a whole class. For b-edge covers, CSDS and the maximal kinds
// the class factorization leaves the separator demands unassigned and fails
// whenever subclasses are needed.
ProductCertificate certify_cartesian_product(const StateSpace& sp, const ClassPartition& part, int cls);

// Exhaustive check of a given factorization over `members`.
ProductCertificate certify_with_factors(const StateSpace& sp, std::vector<int> members, FactorSpec a, FactorSpec b,
                                        std::vector<std::pair<int, std::uint8_t>> fixed, std::string label);

struct Subclass {
  std::string label;
  ProductCertificate cert;  // cert.members are the subclass states
};

struct SubclassCover {
  int cls = -1;
  std::vector<Subclass> subclasses;  // nonempty ones, in label order
  bool union_ok = false;
  bool all_certified = false;
  int max_multiplicity = 0;
  int multiplicity_bound = 0;        // number of labels tried
  double max_size_ratio = 0;         // |C_T| / |C_T_label|
  double ratio_bound = 0;            // 2^{b|X|} or 2^{|U|}; 0 when not applicable
  int U_size = 0;
  std::vector<std::tuple<int, int, int>> overlaps;  // (i, j, shared states)
  double min_overlap_fraction = 1;   // over overlapping pairs, shared / smaller
  bool linked = false;               // subclasses connected by overlaps or edges
};

// Kinds b_edge_cover, csds, maximal_independent_set, maximal_b_matching.
// Throws ChainError for other kinds or when b > 4 or |X| > 8 for b-edge covers.
SubclassCover subclass_decompose(const StateSpace& sp, const ClassPartition& part, int cls);

// All subclasses of all classes as one cover with cls = -1; linkage and
// overlaps are recomputed over the union.
SubclassCover merge_covers(const StateSpace& sp, const std::vector<SubclassCover>& covers);

bool needs_subclasses(ChainKind k);
bool hierarchical_kind(ChainKind k);  // IS, partial colorings, CSDS, b-edge covers, b-matchings

struct TraceOrder {
  bool upward = false;                         // root is the full trace
  std::vector<std::vector<int>> parents;       // covering relation
  std::vector<int> roots;                      // classes without a parent
  bool sizes_ok = true;
  bool unique_max = true;
  bool matching_ok = true;
  std::string witness;
  bool ok() const { return sizes_ok && unique_max && matching_ok; }
};

TraceOrder build_trace_order(const StateSpace& sp, const ClassPartition& part);

enum class Variant { nonhier, hier, relaxed_hier, relaxed_nonhier };
const char* variant_name(Variant v);
Variant default_variant(ChainKind k);

struct ConditionLine {
  std::string name;
  bool checked = true;   // false: measured only
  bool pass = true;
  double value = 0;
  std::string detail;
};

struct ConditionReport {
  Variant variant;
  std::vector<ConditionLine> lines;
  bool ok() const;
  std::string text() const;
};

ConditionReport verify_framework_conditions(const StateSpace& sp, const ClassPartition& part, Variant v,
                                            const std::vector<SubclassCover>* covers = nullptr,
                                            double overlap_floor = 0.25);

std::string partition_report(const StateSpace& sp, const ClassPartition& part);

}  // namespace gd
