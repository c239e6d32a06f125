#include <gtest/gtest.h>

#include <cmath>

#include "gd/bounds.hpp"

using namespace gd;

TEST(Forms, LowerBoundsFromCongestion) {
  BoundParams p;
  p.rho = 1;
  EXPECT_DOUBLE_EQ(expansion_lower(p).value(), 0.5);
  p.rho_weighted = 4;
  EXPECT_DOUBLE_EQ(conductance_lower(p).value(), 0.125);
  p.rho = 0;
  EXPECT_FALSE(expansion_lower(p).applicable);
  EXPECT_THROW(conductance_lower(BoundParams{}), BoundError);
}

TEST(Forms, HierarchicalLevelForm) {
  BoundParams p;
  p.kind = ChainKind::independent_set;
  p.n = 8;
  p.K = 4;
  p.N = 4;
  p.delta_M = 16;
  // (2K + 1)^{2 log n} delta_M^2 log N = 9^6 * 256 * 2
  EXPECT_NEAR(hier_mixing(p).log2_value, std::log2(std::pow(9.0, 6) * 512), 1e-9);
  p.lambda = 2;
  EXPECT_FALSE(hier_mixing(p).applicable);
  p.kind = ChainKind::q_coloring;
  EXPECT_FALSE(hier_mixing(p).applicable);
}

TEST(Forms, NonhierarchicalLevelForm) {
  BoundParams p;
  p.kind = ChainKind::q_coloring;
  p.n = 4;
  p.K = 3;
  p.N = 16;
  p.E_min = 8;
  p.delta_M = 2;
  // (2N/E_min + 1)^{2 log n} delta_M^2 log N = 5^4 * 4 * 4
  EXPECT_NEAR(nonhier_mixing(p).log2_value, std::log2(625.0 * 16), 1e-9);
  p.K = 1;
  EXPECT_NEAR(nonhier_mixing(p).log2_value, std::log2(16.0), 1e-9);
}

TEST(Forms, ExpansionMixing) {
  BoundParams p;
  p.N = 8;
  p.delta_M = 2;
  p.h = 0.5;
  EXPECT_NEAR(expansion_mixing(p).value(), 4 / 0.25 * std::log(32.0), 1e-9);
  p.h.reset();
  p.rho = 1;
  EXPECT_NEAR(expansion_mixing(p).value(), 4 / 0.25 * std::log(32.0), 1e-9);
  p.N = 1;
  EXPECT_FALSE(expansion_mixing(p).applicable);
}

TEST(Forms, ValuesBeyondDoubleRange) {
  BoundEntry e;
  e.log2_value = 5000;
  EXPECT_TRUE(std::isinf(e.value()));
}

TEST(Report, MissingInputsAreNotApplicable) {
  const BoundReport r = bound_report(BoundParams{}, 3);
  ASSERT_EQ(r.entries.size(), 7u);
  for (const auto& e : r.entries) EXPECT_FALSE(e.applicable) << e.name;
  EXPECT_TRUE(r.consistent());
  EXPECT_NE(r.find("chain_mixing"), nullptr);
  EXPECT_EQ(r.find("nope"), nullptr);
}

TEST(Report, ConsistencyIsOneSided) {
  BoundParams p;
  p.kind = ChainKind::independent_set;
  p.N = 8;
  p.delta_M = 2;
  p.h = 0.5;
  EXPECT_TRUE(bound_report(p, 10).consistent());
  EXPECT_FALSE(bound_report(p, 1000).consistent());
}

TEST(Report, MeasuredSpacesAreConsistent) {
  for (ChainKind k : {ChainKind::independent_set, ChainKind::partial_q_coloring, ChainKind::q_coloring}) {
    const StateSpace sp = build_state_space(generate(Family::cycle, 5), {k, 1, 4});
    const ClassPartition part =
        partition_by_trace(sp, find_balanced_separator(sp.graph, compute_decomposition(sp.graph)));
    BoundParams p = measure_params(sp, &part);
    EXPECT_EQ(*p.N, sp.size());
    EXPECT_EQ(*p.K, part.size());
    EXPECT_EQ(*p.t, 2);
    const Flow f = build_flow(sp);
    p.rho = congestion(f);
    p.rho_weighted = congestion(reweight_flow(f, sp));
    const BoundReport r = bound_report(p, exact_mixing_time(sp, 0.25));
    EXPECT_TRUE(r.consistent()) << r.text();
    const std::string row = r.csv_row(), header = BoundReport::csv_header();
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
  }
}
