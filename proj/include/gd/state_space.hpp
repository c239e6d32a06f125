#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gd/chains.hpp"
#include "gd/graph.hpp"

namespace gd {

inline constexpr int kDefaultStateCap = 200000;
inline constexpr int kDefaultExactCap = 2000;
inline constexpr int kDefaultCutLimit = 22;

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Valid states in payload-lexicographic order. Throws CapExceeded past cap.
std::vector<State> enumerate_states(const Graph& g, const ChainParams& p, int cap = kDefaultStateCap);
// Single-threaded reference with the same output.
std::vector<State> enumerate_states_serial(const Graph& g, const ChainParams& p, int cap = kDefaultStateCap);

enum class Normalizer { delta_M, sites };

struct StateSpace {
  Graph graph;
  ChainParams params;
  Normalizer norm = Normalizer::delta_M;
  std::vector<State> states;
  std::vector<std::pair<int, int>> edges;        // i < j, sorted
  std::vector<std::vector<int>> adj;             // sorted neighbor indices
  std::vector<std::vector<int>> adj_edge;        // edge ids aligned with adj
  std::vector<std::vector<double>> adj_rate;     // move acceptance rates aligned with adj
  std::vector<int> weight_exp;                   // exponent of lambda per state
  std::vector<double> pi;                        // normalized stationary weights
  double log_Z = 0;                              // log of sum of lambda^exp
  int delta_M = 0;                               // max Glauber-graph degree
  double normalizer = 1;                         // transition denominator

  int size() const { return static_cast<int>(states.size()); }
  int index_of(const State& s) const;  // -1 when absent
  double Z() const;
  double unnormalized(int i) const;
  double prob(int i, int k) const { return adj_rate[i][k] / normalizer; }  // P(i, adj[i][k])
  double self_loop(int i) const;
  double edge_flow(int i, int k) const { return pi[i] * prob(i, k); }     // Q(i, adj[i][k])
};

// Maximal chains add the reversals of forward moves. Throws CapExceeded and
// ChainError (including a nonsymmetric move relation).
StateSpace build_state_space(const Graph& g, const ChainParams& p, int cap = kDefaultStateCap,
                             Normalizer norm = Normalizer::delta_M);
StateSpace build_state_space_serial(const Graph& g, const ChainParams& p, int cap = kDefaultStateCap,
                                    Normalizer norm = Normalizer::delta_M);

struct Connectivity {
  bool connected = true;
  int components = 1;
  std::optional<std::pair<int, int>> witness;  // two mutually unreachable states
};
Connectivity check_connectivity(const StateSpace& sp);

struct Stationary {
  std::vector<double> pi;
  double fixed_point_residual = 0;    // max |pi P - pi|
  double detailed_balance_residual = 0;
  double row_sum_residual = 0;        // max |sum_j P(i,j) - 1|
  double min_self_loop = 1;
};
// Throws std::runtime_error on a disconnected space.
Stationary exact_stationary(const StateSpace& sp);

struct Rational {
  long long num = 0, den = 1;  // den == 0 means +infinity
  double value() const;
  bool infinite() const { return den == 0; }
};

// min over 0 < |S| <= |V|/2 of cut(S)/|S|; +infinity for fewer than two vertices.
Rational exact_expansion(const std::vector<std::vector<int>>& adj, int limit = kDefaultCutLimit);
Rational exact_expansion(const StateSpace& sp, int limit = kDefaultCutLimit);
// min over 0 < pi(S) <= 1/2 of Q(S, S^c)/pi(S); +infinity when no subset qualifies.
double exact_conductance(const StateSpace& sp, int limit = kDefaultCutLimit);

// TV(pi_t, pi) for t = 0..t_max from a point mass at start.
std::vector<double> distribution_evolution(const StateSpace& sp, int start, int t_max);

// Smallest t with max over starts TV < epsilon. Throws CapExceeded above
// state_limit and std::runtime_error when t_limit is reached.
int exact_mixing_time(const StateSpace& sp, double epsilon, int state_limit = kDefaultExactCap,
                      int t_limit = 10000000);
int exact_mixing_time_serial(const StateSpace& sp, double epsilon, int state_limit = kDefaultExactCap,
                             int t_limit = 10000000);

std::string dump_state_space(const StateSpace& sp);
// Rebuilds the space from the graph and the recorded params; throws when the
// recorded states or edges do not match.
StateSpace load_state_space(const std::string& json, const Graph& g);

std::string state_hex(const State& s);

}  // namespace gd
