#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gd/flow.hpp"

using namespace gd;

namespace {

FlowGraph edge_graph(double p0, double rate) {
  return make_flow_graph(2, {{0, 1}}, {p0, 1 - p0}, {p0 * rate});
}

void expect_all_conserve(const Flow& f, double tol = 1e-12) {
  for (int s = 0; s < f.graph->n; ++s)
    for (int t = 0; t < f.graph->n; ++t)
      if (s != t) EXPECT_LT(conservation_error(*f.graph, commodity_flow(f, s, t), s, t), tol) << s << "->" << t;
}

Graph with_b(Graph g, int b) {
  g.set_b_values(std::vector<int>(g.n(), b));
  return g;
}

}  // namespace

TEST(ShortestPath, SingleEdge) {
  const FlowGraph g = edge_graph(0.25, 0.5);
  const Flow u = shortest_path_flow(g, Demand::uniform);
  EXPECT_DOUBLE_EQ(congestion(u), 1);
  const Flow w = shortest_path_flow(g, Demand::weighted);
  // load pi0 pi1 over Q = pi0 * rate
  EXPECT_NEAR(congestion(w), 0.75 / 0.5, 1e-15);
  EXPECT_TRUE(u.valid());
  EXPECT_TRUE(w.valid());
}

TEST(Product, TwoEdgesMakeASquare) {
  const FlowGraph k2 = edge_graph(0.5, 0.5);
  const Flow h = shortest_path_flow(k2, Demand::weighted);
  const Flow p = product_flow(h, h);
  EXPECT_EQ(p.graph->n, 4);
  EXPECT_EQ(p.graph->m(), 4);
  EXPECT_TRUE(p.valid());
  expect_all_conserve(p);
  EXPECT_LE(congestion(p), congestion(h) + 1e-9);
}

TEST(Product, RandomPairsStayBelowFactorCongestion) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const Flow h = shortest_path_flow(random_flow_graph(2 + seed % 6, seed), Demand::weighted);
    const Flow j = shortest_path_flow(random_flow_graph(2 + (seed * 7) % 5, seed + 100), Demand::weighted);
    const Flow p = product_flow(h, j);
    EXPECT_TRUE(p.valid());
    EXPECT_LE(congestion(p), std::max(congestion(h), congestion(j)) + 1e-9) << seed;
    double z = 0;
    for (double x : p.graph->pi) z += x;
    EXPECT_NEAR(z, 1, 1e-12);
  }
}

TEST(Product, RejectsMixedDemands) {
  const FlowGraph k2 = edge_graph(0.5, 0.5);
  EXPECT_THROW(product_flow(shortest_path_flow(k2, Demand::uniform), shortest_path_flow(k2, Demand::weighted)),
               FlowError);
}

TEST(StateSpaceFlow, PathOfThree) {
  const StateSpace sp = build_state_space(generate(Family::path, 3), {ChainKind::independent_set, 1, 3});
  const Flow f = build_flow(sp);
  EXPECT_TRUE(f.valid());
  EXPECT_TRUE(f.exact);
  EXPECT_EQ(f.commodities, 20);
  EXPECT_EQ(f.variant, Variant::hier);
  expect_all_conserve(f);
  // Every commodity crosses some edge, so the busiest of the 10 directed edges
  // carries at least the average.
  EXPECT_GE(congestion(f), 20.0 / 10 - 1e-12);
  std::istringstream dump(dump_flow(f));
  std::string line;
  int lines = 0;
  while (std::getline(dump, line)) lines += !line.empty();
  EXPECT_EQ(lines, 20);
}

TEST(StateSpaceFlow, EveryChainIsValid) {
  for (ChainKind k : kAllChains) {
    Graph g = generate(Family::partial_k_tree, 6, 1, 2);
    if (is_edge_chain(k)) g = with_b(g, 1);
    const StateSpace sp = build_state_space(g, {k, 2, 4});
    if (!check_connectivity(sp).connected) continue;
    FlowOptions o;
    o.overlap_floor = 0;
    const Flow f = build_flow(sp, o);
    EXPECT_TRUE(f.valid()) << chain_name(k);
    EXPECT_LT(f.max_conservation_error, 1e-9) << chain_name(k);
    const Flow w = reweight_flow(f, sp, o);
    EXPECT_TRUE(w.valid()) << chain_name(k);
    EXPECT_EQ(w.demand, Demand::weighted);
    EXPECT_GT(congestion(w), 0);
  }
}

TEST(StateSpaceFlow, SandwichOnSmallSpaces) {
  for (int n = 2; n <= 5; ++n) {
    const StateSpace sp = build_state_space(generate(Family::cycle, std::max(3, n)), {ChainKind::independent_set, 2, 3});
    const Flow f = build_flow(sp);
    const Flow w = reweight_flow(f, sp);
    EXPECT_GE(exact_expansion(sp).value(), 1 / (2 * congestion(f)) - 1e-9);
    EXPECT_GE(exact_conductance(sp), 1 / (2 * congestion(w)) - 1e-9);
  }
}

TEST(StateSpaceFlow, VariantMustFitChain) {
  const StateSpace sp = build_state_space(generate(Family::path, 4), {ChainKind::independent_set, 1, 3});
  EXPECT_THROW(build_flow(sp, Variant::relaxed_hier), FlowError);
  EXPECT_TRUE(build_flow(sp, Variant::nonhier).valid());
}

TEST(StateSpaceFlow, CapIsEnforced) {
  const StateSpace sp = build_state_space(generate(Family::path, 6), {ChainKind::independent_set, 1, 3});
  FlowOptions o;
  o.state_cap = 5;
  EXPECT_THROW(build_flow(sp, o), FlowError);
}

TEST(WeightFactorization, HardcoreClassesAtLambdaTwo) {
  const StateSpace sp = build_state_space(generate(Family::cycle, 6), {ChainKind::independent_set, 2, 3}, kDefaultStateCap,
                                          Normalizer::sites);
  const ClassPartition part = partition_by_trace(sp, find_balanced_separator(sp.graph, compute_decomposition(sp.graph)));
  for (int c = 0; c < part.size(); ++c) {
    const WeightFactorCheck w = weight_factorization(sp, certify_cartesian_product(sp, part, c));
    EXPECT_LT(w.vertex_residual, 1e-12);
    EXPECT_LT(w.edge_residual, 1e-12);
    EXPECT_TRUE(w.edges_checked);
    EXPECT_EQ(w.vertices, static_cast<long long>(part.members[c].size()));
  }
}
