#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gd/bounds.hpp"
#include "gd/chains.hpp"
#include "gd/graph.hpp"
#include "gd/rng.hpp"
#include "gd/state_space.hpp"

namespace gd {

// Local Glauber step without an explicit state space. Site chains draw a
// uniform (site, proposal) and accept a legal move with its rate; maximal
// chains stay put with probability 1/2, else pick one of delta_M slots and move
// to that neighbor when the slot is occupied.
inline constexpr size_t kMoveMemo = 1 << 16;

class Simulator {
 public:
  // delta_M <= 0 picks analytic_delta_bound for maximal kinds.
  Simulator(const Graph& g, const ChainParams& p, State start, double delta_M = 0);
  void step(SplitMix64& rng);
  const State& state() const { return s_; }
  long long accepted() const { return accepted_; }

 private:
  const Graph& g_;
  ChainParams p_;
  State s_;
  long long sites_ = 0;
  long long slots_ = 0;
  long long accepted_ = 0;
  std::map<State, std::vector<State>> moves_;  // maximal kinds, bounded by kMoveMemo
};

struct SimResult {
  State final_state;
  long long steps = 0;
  long long accepted = 0;
};

// Starts from initial_state.
SimResult simulate_chain(const Graph& g, const ChainParams& p, long long steps, std::uint64_t seed,
                         double delta_M = 0);

// Time-average occupation of one trajectory over the states of sp.
std::vector<double> empirical_distribution(const StateSpace& sp, long long steps, std::uint64_t seed);
double total_variation(const std::vector<double>& a, const std::vector<double>& b);

struct TvPoint {
  long long t = 0;
  double empirical = 0;  // cross-replica histogram vs pi
  double exact = 0;      // distribution_evolution from the same start
};

// Replicas start at initial_state; checkpoints default to 0, 1, 2, 4, ... up to steps.
// The space must use the site normalizer for site chains so both curves follow one chain.
// Throws CapExceeded above exact_cap.
std::vector<TvPoint> empirical_tv(const StateSpace& sp, long long steps, int replicas, std::uint64_t seed,
                                  std::vector<long long> checkpoints = {}, int exact_cap = kDefaultExactCap);

enum class Mode { exact, simulate, flow, full };
const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);

struct ExperimentConfig {
  std::string graph_file;             // empty: use the generator
  Family family = Family::path;
  int n = 3, k = 0;
  std::uint64_t graph_seed = 0;
  ChainParams chain;
  std::optional<int> b;               // uniform b for b-problems
  Mode mode = Mode::exact;
  long long steps = 100000;
  int replicas = 1000;
  long long tv_steps = 256;           // horizon of the replica TV curve
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int cap_states = kDefaultStateCap;
  int cap_exact = kDefaultExactCap;
};

// key = value lines, '#' comments. Throws std::invalid_argument on unknown
// keys, bad values or nonpositive caps.
ExperimentConfig parse_config(const std::string& text);
std::string format_config(const ExperimentConfig& c);

Graph config_graph(const ExperimentConfig& c);

struct Check {
  std::string name;
  bool ran = false;
  bool pass = false;
  std::string detail;  // reason when skipped
};

struct RunReport {
  ExperimentConfig config;
  std::string graph_name;
  int n = 0, m = 0;
  std::optional<long long> states;
  std::optional<bool> connected;
  std::optional<int> delta_M;
  std::optional<int> classes;
  std::optional<double> detailed_balance, fixed_point;
  std::optional<double> rho, rho_weighted;
  std::optional<double> h, phi;
  std::optional<int> tau;
  std::optional<BoundReport> bounds;
  std::vector<TvPoint> tv;
  std::optional<double> empirical_tv;  // single chain occupation vs pi
  std::optional<std::string> final_state;
  std::vector<Check> checks;
  double seconds = 0;  // summary only; CSV stays byte-identical

  bool ok() const;
  static std::string csv_header();  // includes the version comment line
  std::string csv_row() const;
  std::string tv_csv() const;
  std::string summary() const;
};

// Runs the mode pipeline with per-stage degradation and writes report.csv,
// tv.csv and summary.txt into out_dir (when nonempty). Throws CapExceeded when
// a required stage for the mode exceeds its cap.
RunReport run_experiment(const ExperimentConfig& c, bool write = true);

}  // namespace gd
