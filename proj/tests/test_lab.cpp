#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gd/lab.hpp"

using namespace gd;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

ExperimentConfig small_config(Mode mode) {
  ExperimentConfig c;
  c.family = Family::cycle;
  c.n = 5;
  c.chain = {ChainKind::independent_set, 2, 3};
  c.mode = mode;
  c.steps = 20000;
  c.replicas = 200;
  c.tv_steps = 16;
  c.seed = 7;
  c.out_dir = "";
  return c;
}

}  // namespace

TEST(Simulate, ZeroStepsStaysAtStart) {
  const Graph g = generate(Family::path, 4);
  const ChainParams p{ChainKind::independent_set, 1, 3};
  const SimResult r = simulate_chain(g, p, 0, 1);
  EXPECT_EQ(r.final_state, initial_state(g, p));
  EXPECT_EQ(r.accepted, 0);
}

TEST(Simulate, StatesStayValidAndRunsRepeat) {
  for (ChainKind k : kAllChains) {
    Graph g = generate(Family::cycle, 6);
    if (is_edge_chain(k)) g.set_b_values(std::vector<int>(g.n(), 1));
    const ChainParams p{k, 2, 4};
    const SimResult a = simulate_chain(g, p, 5000, 3), b = simulate_chain(g, p, 5000, 3);
    EXPECT_TRUE(is_valid_state(g, p, a.final_state)) << chain_name(k);
    EXPECT_EQ(a.final_state, b.final_state);
    EXPECT_EQ(a.accepted, b.accepted);
  }
}

TEST(Simulate, MaximalSetsOnPathOfThreeAreUniform) {
  const StateSpace sp = build_state_space(generate(Family::path, 3), {ChainKind::maximal_independent_set, 1, 3});
  ASSERT_EQ(sp.size(), 2);
  const std::vector<double> emp = empirical_distribution(sp, 200000, 11);
  EXPECT_NEAR(emp[0], 0.5, 0.01);
  EXPECT_NEAR(emp[1], 0.5, 0.01);
}

TEST(Simulate, HardcoreOccupationApproachesPi) {
  const StateSpace sp = build_state_space(generate(Family::path, 3), {ChainKind::independent_set, 2, 3});
  EXPECT_LT(total_variation(empirical_distribution(sp, 400000, 5), sp.pi), 0.01);
}

TEST(TotalVariation, Basics) {
  EXPECT_DOUBLE_EQ(total_variation({1, 0}, {0, 1}), 1);
  EXPECT_DOUBLE_EQ(total_variation({0.5, 0.5}, {0.25, 0.75}), 0.25);
  EXPECT_THROW(total_variation({1}, {0.5, 0.5}), std::invalid_argument);
}

TEST(EmpiricalTv, StartsAtPointMassAndTracksExact) {
  const StateSpace sp = build_state_space(generate(Family::path, 3), {ChainKind::independent_set, 1, 3},
                                          kDefaultStateCap, Normalizer::sites);
  const auto curve = empirical_tv(sp, 64, 4000, 9);
  ASSERT_FALSE(curve.empty());
  EXPECT_EQ(curve[0].t, 0);
  EXPECT_NEAR(curve[0].empirical, curve[0].exact, 1e-12);
  EXPECT_EQ(curve.back().t, 64);
  for (const auto& pt : curve) EXPECT_NEAR(pt.empirical, pt.exact, 0.05) << pt.t;
  EXPECT_THROW(empirical_tv(sp, 4, 10, 1, {}, 2), CapExceeded);
}

TEST(Config, RoundTrip) {
  ExperimentConfig c = small_config(Mode::full);
  c.b = 2;
  c.out_dir = "some/dir";
  const ExperimentConfig back = parse_config(format_config(c));
  EXPECT_EQ(format_config(back), format_config(c));
  EXPECT_EQ(back.b, 2);
  EXPECT_EQ(back.mode, Mode::full);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("nonsense = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("lambda = -1\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("cap_states = 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("mode = sideways\n"), std::invalid_argument);
  EXPECT_NO_THROW(parse_config("# comment only\n\nn = 4\n"));
}

TEST(Run, ExactModeChecksPass) {
  const RunReport r = run_experiment(small_config(Mode::exact), false);
  EXPECT_TRUE(r.ok()) << r.summary();
  ASSERT_TRUE(r.tau);
  EXPECT_EQ(*r.tau, exact_mixing_time(build_state_space(generate(Family::cycle, 5), {ChainKind::independent_set, 2, 3}), 0.25));
  EXPECT_TRUE(r.bounds && r.bounds->consistent());
}

TEST(Run, SimulateModeLeavesExactFieldsEmpty) {
  const RunReport r = run_experiment(small_config(Mode::simulate), false);
  EXPECT_TRUE(r.ok()) << r.summary();
  EXPECT_FALSE(r.tau);
  EXPECT_TRUE(r.final_state);
  const std::string row = r.csv_row();
  EXPECT_NE(row.find(",NA,"), std::string::npos);
}

TEST(Run, CsvIsByteIdenticalAcrossRuns) {
  const auto dir = std::filesystem::temp_directory_path() / "gd_lab_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig c = small_config(Mode::full);
  std::string first;
  for (int i = 0; i < 2; ++i) {
    c.out_dir = (dir / std::to_string(i)).string();
    run_experiment(c);
    const std::string csv = slurp(dir / std::to_string(i) / "report.csv") + slurp(dir / std::to_string(i) / "tv.csv");
    EXPECT_EQ(csv.rfind("# gd-run-csv v1", 0), 0u);
    if (i == 0) first = csv;
    else EXPECT_EQ(csv, first);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "0" / "summary.txt"));
  std::filesystem::remove_all(dir);
}
