#include <gtest/gtest.h>

#include <cmath>

#include "gd/state_space.hpp"

using namespace gd;

namespace {

const ChainParams kIS{ChainKind::independent_set, 1.0, 3};

using Matrix = std::vector<std::vector<double>>;

// Dense transition matrix from the chain's own transition_probability.
Matrix dense(const StateSpace& sp) {
  const int N = sp.size();
  Matrix P(N, std::vector<double>(N, 0));
  for (int i = 0; i < N; ++i) {
    for (int j : sp.adj[i]) P[i][j] = transition_probability(sp.graph, sp.params, sp.states[i], sp.states[j], sp.normalizer);
    P[i][i] = transition_probability(sp.graph, sp.params, sp.states[i], sp.states[i], sp.normalizer);
  }
  return P;
}

std::vector<double> weights(const StateSpace& sp) {
  std::vector<double> w;
  double z = 0;
  for (const State& s : sp.states) z += unnormalized_weight(sp.params, s);
  for (const State& s : sp.states) w.push_back(unnormalized_weight(sp.params, s) / z);
  return w;
}

std::vector<double> tv_curve(const Matrix& P, const std::vector<double>& pi, int start, int t_max) {
  const int N = static_cast<int>(P.size());
  std::vector<double> x(N, 0), out;
  x[start] = 1;
  for (int t = 0; t <= t_max; ++t) {
    double tv = 0;
    for (int i = 0; i < N; ++i) tv += std::abs(x[i] - pi[i]);
    out.push_back(tv / 2);
    std::vector<double> y(N, 0);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) y[j] += x[i] * P[i][j];
    x = y;
  }
  return out;
}

int oracle_mixing(const StateSpace& sp, double eps) {
  const Matrix P = dense(sp);
  const std::vector<double> pi = weights(sp);
  for (int t = 0;; ++t) {
    double worst = 0;
    for (int s = 0; s < sp.size(); ++s) worst = std::max(worst, tv_curve(P, pi, s, t).back());
    if (worst < eps) return t;
  }
}

double oracle_expansion(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  double best = INFINITY;
  for (int mask = 1; mask < (1 << n); ++mask) {
    const int k = __builtin_popcount(mask);
    if (2 * k > n) continue;
    int cut = 0;
    for (int v = 0; v < n; ++v)
      if (mask >> v & 1)
        for (int w : adj[v]) cut += !(mask >> w & 1);
    best = std::min(best, static_cast<double>(cut) / k);
  }
  return best;
}

double oracle_conductance(const StateSpace& sp) {
  const Matrix P = dense(sp);
  const int n = sp.size();
  double best = INFINITY;
  for (int mask = 1; mask < (1 << n); ++mask) {
    double pi = 0, q = 0;
    for (int v = 0; v < n; ++v)
      if (mask >> v & 1) {
        pi += sp.pi[v];
        for (int w = 0; w < n; ++w)
          if (!(mask >> w & 1)) q += sp.pi[v] * P[v][w];
      }
    if (pi <= 0.5 + 1e-15) best = std::min(best, q / pi);
  }
  return best;
}

StateSpace two_state(double p) {
  StateSpace sp;
  sp.graph = generate(Family::path, 1);
  sp.states = {State{0}, State{1}};
  sp.edges = {{0, 1}};
  sp.adj = {{1}, {0}};
  sp.adj_edge = {{0}, {0}};
  sp.adj_rate = {{p}, {p}};
  sp.weight_exp = {0, 0};
  sp.pi = {0.5, 0.5};
  sp.delta_M = 1;
  sp.normalizer = 1;
  return sp;
}

}  // namespace

TEST(Enumerate, SmallOracles) {
  EXPECT_EQ(enumerate_states(generate(Family::path, 3), kIS).size(), 5u);
  EXPECT_EQ(enumerate_states(generate(Family::cycle, 4), kIS).size(), 7u);
  const auto mis = enumerate_states(generate(Family::path, 3), {ChainKind::maximal_independent_set, 1.0, 3});
  EXPECT_EQ(mis, (std::vector<State>{State{0, 1, 0}, State{1, 0, 1}}));
}

TEST(Enumerate, FibonacciAndLucas) {
  long long a = 1, b = 2;  // F(2), F(3)
  for (int n = 1; n <= 12; ++n) {
    EXPECT_EQ(static_cast<long long>(enumerate_states(generate(Family::path, n), kIS).size()), b) << n;
    const long long c = a + b;
    a = b;
    b = c;
  }
  std::vector<long long> lucas = {2, 1};
  for (int n = 2; n <= 12; ++n) lucas.push_back(lucas[n - 1] + lucas[n - 2]);
  for (int n = 3; n <= 12; ++n)
    EXPECT_EQ(static_cast<long long>(enumerate_states(generate(Family::cycle, n), kIS).size()), lucas[n]) << n;
}

TEST(Enumerate, SortedUniqueAndCapped) {
  const auto s = enumerate_states(generate(Family::grid, 3, 0, 3), kIS);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
  EXPECT_THROW(enumerate_states(generate(Family::grid, 3, 0, 3), kIS, 10), CapExceeded);
  EXPECT_EQ(s, enumerate_states_serial(generate(Family::grid, 3, 0, 3), kIS));
}

TEST(Space, Examples) {
  const StateSpace p3 = build_state_space(generate(Family::path, 3), kIS);
  EXPECT_EQ(p3.size(), 5);
  EXPECT_EQ(p3.edges.size(), 5u);
  EXPECT_EQ(p3.delta_M, 3);
  const StateSpace one = build_state_space(generate(Family::path, 1), kIS);
  EXPECT_EQ(one.size(), 2);
  EXPECT_EQ(one.edges.size(), 1u);
  const StateSpace k2 = build_state_space(generate(Family::path, 2), {ChainKind::q_coloring, 1.0, 3});
  EXPECT_EQ(k2.size(), 6);
  long long adjacencies = 0;
  for (int i = 0; i < k2.size(); ++i)
    for (int j : k2.adj[i]) {
      ++adjacencies;
      EXPECT_TRUE(std::binary_search(k2.adj[j].begin(), k2.adj[j].end(), i));
    }
  EXPECT_EQ(adjacencies, 12);
  const StateSpace empty = build_state_space(Graph::from_edges(0, {}), kIS);
  EXPECT_EQ(empty.size(), 1);
  EXPECT_TRUE(check_connectivity(empty).connected);
}

TEST(Space, SerialMatchesParallel) {
  const Graph g = generate(Family::partial_k_tree, 8, 2, 2);
  for (ChainKind k : kAllChains) {
    const ChainParams p{k, 2.0, 4};
    Graph h = g;
    if (is_edge_chain(k)) h.set_b_values(std::vector<int>(g.n(), 1));
    const StateSpace a = build_state_space(h, p), b = build_state_space_serial(h, p);
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.edges, b.edges);
    EXPECT_EQ(a.delta_M, b.delta_M);
  }
}

TEST(Space, DeltaMIsMaxDegree) {
  const StateSpace sp = build_state_space(generate(Family::cycle, 6), kIS);
  size_t d = 0;
  for (const auto& a : sp.adj) d = std::max(d, a.size());
  EXPECT_EQ(sp.delta_M, static_cast<int>(d));
}

TEST(Connectivity, Examples) {
  EXPECT_TRUE(check_connectivity(build_state_space(generate(Family::path, 3), kIS)).connected);
  EXPECT_TRUE(check_connectivity(build_state_space(generate(Family::path, 3), {ChainKind::maximal_independent_set, 1, 3}))
                  .connected);
  // Triangle 3-colorings are frozen: no recoloring is possible.
  const Connectivity frozen = check_connectivity(build_state_space(generate(Family::complete, 3), {ChainKind::q_coloring, 1, 3}));
  EXPECT_FALSE(frozen.connected);
  EXPECT_EQ(frozen.components, 6);
  EXPECT_TRUE(frozen.witness);
}

TEST(Stationary, Examples) {
  const StateSpace u = build_state_space(generate(Family::path, 4), kIS);
  for (double p : exact_stationary(u).pi) EXPECT_NEAR(p, 1.0 / u.size(), 1e-15);
  const StateSpace sp = build_state_space(generate(Family::path, 3), {ChainKind::independent_set, 2.0, 3});
  const Stationary st = exact_stationary(sp);
  EXPECT_NEAR(st.pi[sp.index_of(State{1, 0, 1})], 4.0 / 11, 1e-15);
  EXPECT_NEAR(st.pi[sp.index_of(State{0, 0, 0})], 1.0 / 11, 1e-15);
  EXPECT_LT(st.detailed_balance_residual, 1e-12);
  EXPECT_LT(st.fixed_point_residual, 1e-10);
  EXPECT_LT(st.row_sum_residual, 1e-12);
  const std::vector<double> w = weights(sp);
  for (int i = 0; i < sp.size(); ++i) EXPECT_NEAR(st.pi[i], w[i], 1e-15);
}

TEST(Stationary, RejectsDisconnected) {
  EXPECT_THROW(exact_stationary(build_state_space(generate(Family::complete, 3), {ChainKind::q_coloring, 1, 3})),
               std::exception);
}

TEST(Expansion, GraphExamples) {
  const auto k2 = generate(Family::path, 2), p3 = generate(Family::path, 3), c4 = generate(Family::cycle, 4);
  auto adj = [](const Graph& g) {
    std::vector<std::vector<int>> a(g.n());
    for (int v = 0; v < g.n(); ++v) a[v] = g.neighbors(v);
    return a;
  };
  EXPECT_EQ(exact_expansion(adj(k2)).value(), 1);
  EXPECT_EQ(exact_expansion(adj(p3)).value(), 1);
  EXPECT_EQ(exact_expansion(adj(c4)).value(), 1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = adj(generate(Family::partial_k_tree, 9, seed, 2));
    EXPECT_NEAR(exact_expansion(a).value(), oracle_expansion(a), 1e-15);
  }
  EXPECT_THROW(exact_expansion(std::vector<std::vector<int>>(30), 22), CapExceeded);
}

TEST(Conductance, MatchesOracle) {
  EXPECT_DOUBLE_EQ(exact_conductance(two_state(0.25)), 0.25);
  for (double lam : {0.5, 1.0, 2.0})
    for (ChainKind k : {ChainKind::independent_set, ChainKind::csds, ChainKind::partial_q_coloring}) {
      const StateSpace sp = build_state_space(generate(Family::path, 3), {k, lam, 2});
      if (sp.size() > 16) continue;
      EXPECT_NEAR(exact_conductance(sp), oracle_conductance(sp), 1e-14) << chain_name(k) << lam;
    }
}

TEST(Evolution, MatchesDenseOracle) {
  EXPECT_NEAR(distribution_evolution(two_state(0.25), 0, 3)[3], 0.0625, 1e-15);
  for (double lam : {0.5, 2.0}) {
    const StateSpace sp = build_state_space(generate(Family::cycle, 5), {ChainKind::independent_set, lam, 3});
    const auto got = distribution_evolution(sp, 0, 40);
    const auto want = tv_curve(dense(sp), weights(sp), 0, 40);
    EXPECT_NEAR(got[0], 1 - sp.pi[0], 1e-15);
    for (int t = 0; t <= 40; ++t) EXPECT_NEAR(got[t], want[t], 1e-12);
    for (int t = 1; t <= 40; ++t) EXPECT_LE(got[t], got[t - 1] + 1e-12);
  }
}

TEST(Mixing, Examples) {
  EXPECT_EQ(exact_mixing_time(build_state_space(Graph::from_edges(0, {}), kIS), 0.25), 0);
  EXPECT_EQ(exact_mixing_time(two_state(0.25), 0.25), 2);
  const StateSpace p3 = build_state_space(generate(Family::path, 3), kIS);
  EXPECT_EQ(exact_mixing_time(p3, 0.25), oracle_mixing(p3, 0.25));
  EXPECT_EQ(exact_mixing_time(p3, 0.25), 8);
  EXPECT_EQ(exact_mixing_time_serial(p3, 0.25), 8);
  EXPECT_THROW(exact_mixing_time(p3, 0.25, 3), CapExceeded);
}

TEST(Mixing, MatchesOracleAndIsAntitone) {
  for (ChainKind k : {ChainKind::independent_set, ChainKind::b_matching, ChainKind::maximal_independent_set}) {
    Graph g = generate(Family::cycle, 5);
    const StateSpace sp = build_state_space(g, {k, 2.0, 3});
    int prev = 0;
    for (double eps : {0.4, 0.25, 0.1, 0.01}) {
      const int t = exact_mixing_time(sp, eps);
      EXPECT_EQ(t, oracle_mixing(sp, eps)) << chain_name(k) << " " << eps;
      EXPECT_GE(t, prev);
      prev = t;
    }
  }
}

TEST(Dump, RoundTrip) {
  const Graph g = generate(Family::cycle, 5);
  const StateSpace sp = build_state_space(g, {ChainKind::partial_q_coloring, 2.0, 3});
  const StateSpace back = load_state_space(dump_state_space(sp), g);
  EXPECT_EQ(back.states, sp.states);
  EXPECT_EQ(back.edges, sp.edges);
  EXPECT_EQ(dump_state_space(back), dump_state_space(sp));
  EXPECT_EQ(state_hex(State{1, 0, 1}), state_hex(State{1, 0, 1}));
}
