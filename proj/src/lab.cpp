#include "gd/lab.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gd/decomposition.hpp"
#include "gd/flow.hpp"
#include "gd/partition.hpp"

namespace gd {

Simulator::Simulator(const Graph& g, const ChainParams& p, State start, double delta_M)
    : g_(g), p_(p), s_(std::move(start)) {
  if (is_maximal_chain(p.kind)) {
    const double d = delta_M > 0 ? delta_M : analytic_delta_bound(g, p);
    slots_ = std::max(1LL, static_cast<long long>(std::llround(d)));
  } else {
    sites_ = site_normalizer(g, p);
  }
}

void Simulator::step(SplitMix64& rng) {
  if (slots_ > 0) {
    if (rng.uniform() < 0.5) return;
    const long long slot = static_cast<long long>(rng.below(slots_));
    auto it = moves_.find(s_);
    std::vector<State> fresh;
    if (it == moves_.end()) {
      for (auto& m : enumerate_moves(g_, p_, s_)) fresh.push_back(std::move(m.to));
      if (moves_.size() < kMoveMemo) it = moves_.emplace(s_, std::move(fresh)).first;
    }
    const std::vector<State>& moves = it != moves_.end() ? it->second : fresh;
    if (slot >= static_cast<long long>(moves.size())) return;
    s_ = moves[slot];
    ++accepted_;
    return;
  }
  if (sites_ == 0) return;
  const long long site = static_cast<long long>(rng.below(sites_));
  auto m = propose_site(g_, p_, s_, site);
  if (!m) return;
  if (rng.uniform() >= move_rate(p_, m->type)) return;
  s_[m->index] = m->value;
  ++accepted_;
}

SimResult simulate_chain(const Graph& g, const ChainParams& p, long long steps, std::uint64_t seed, double delta_M) {
  check_params(g, p);
  Simulator sim(g, p, initial_state(g, p), delta_M);
  SplitMix64 rng(seed);
  for (long long t = 0; t < steps; ++t) sim.step(rng);
  return {sim.state(), std::max(0LL, steps), sim.accepted()};
}

namespace {

double sim_slots(const StateSpace& sp) { return is_maximal_chain(sp.params.kind) ? sp.normalizer : 0; }

int lookup(const StateSpace& sp, const State& s) {
  const int i = sp.index_of(s);
  if (i < 0) throw std::logic_error("simulation left the state space: " + state_hex(s));
  return i;
}

}  // namespace

std::vector<double> empirical_distribution(const StateSpace& sp, long long steps, std::uint64_t seed) {
  std::vector<double> freq(sp.size(), 0);
  Simulator sim(sp.graph, sp.params, initial_state(sp.graph, sp.params), sim_slots(sp));
  SplitMix64 rng(seed);
  std::vector<long long> count(sp.size(), 0);
  for (long long t = 0; t < steps; ++t) {
    sim.step(rng);
    ++count[lookup(sp, sim.state())];
  }
  for (int i = 0; i < sp.size(); ++i) freq[i] = steps > 0 ? static_cast<double>(count[i]) / steps : 0;
  return freq;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("total_variation: size mismatch");
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / 2;
}

std::vector<TvPoint> empirical_tv(const StateSpace& sp, long long steps, int replicas, std::uint64_t seed,
                                  std::vector<long long> checkpoints, int exact_cap) {
  if (sp.size() > exact_cap) throw CapExceeded("empirical_tv: no exact reference above the exact cap");
  if (!is_maximal_chain(sp.params.kind) && sp.norm != Normalizer::sites)
    throw std::invalid_argument("empirical_tv: site chains need a site-normalized space");
  if (replicas < 1) throw std::invalid_argument("empirical_tv: replicas must be positive");
  if (checkpoints.empty()) {
    checkpoints.push_back(0);
    for (long long t = 1; t <= steps; t *= 2) checkpoints.push_back(t);
  }
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  const State start = initial_state(sp.graph, sp.params);
  const int s0 = lookup(sp, start);
  const size_t C = checkpoints.size();
  std::vector<int> at(static_cast<size_t>(replicas) * C);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < replicas; ++r) {
    Simulator sim(sp.graph, sp.params, start, sim_slots(sp));
    SplitMix64 rng(substream_seed(seed, r));
    long long t = 0;
    for (size_t c = 0; c < C; ++c) {
      for (; t < checkpoints[c]; ++t) sim.step(rng);
      at[r * C + c] = lookup(sp, sim.state());
    }
  }
  const std::vector<double> exact = distribution_evolution(sp, s0, static_cast<int>(checkpoints.back()));
  std::vector<TvPoint> out;
  for (size_t c = 0; c < C; ++c) {
    std::vector<double> h(sp.size(), 0);
    for (int r = 0; r < replicas; ++r) h[at[r * C + c]] += 1.0 / replicas;
    out.push_back({checkpoints[c], total_variation(h, sp.pi), exact[checkpoints[c]]});
  }
  return out;
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::exact: return "exact";
    case Mode::simulate: return "simulate";
    case Mode::flow: return "flow";
    case Mode::full: return "full";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::exact, Mode::simulate, Mode::flow, Mode::full})
    if (s == mode_name(m)) return m;
  throw std::invalid_argument("unknown mode: " + s);
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

long long to_int(const std::string& key, const std::string& v) {
  size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw std::invalid_argument("config: " + key + " needs an integer, got '" + v + "'");
  return x;
}

double to_double(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw std::invalid_argument("config: " + key + " needs a number, got '" + v + "'");
  return x;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (key == "graph") c.graph_file = v;
    else if (key == "family") c.family = parse_family(v);
    else if (key == "n") c.n = static_cast<int>(to_int(key, v));
    else if (key == "k") c.k = static_cast<int>(to_int(key, v));
    else if (key == "graph_seed") c.graph_seed = static_cast<std::uint64_t>(to_int(key, v));
    else if (key == "chain") c.chain.kind = parse_chain(v);
    else if (key == "lambda") c.chain.lambda = to_double(key, v);
    else if (key == "q") c.chain.q = static_cast<int>(to_int(key, v));
    else if (key == "b") c.b = static_cast<int>(to_int(key, v));
    else if (key == "mode") c.mode = parse_mode(v);
    else if (key == "steps") c.steps = to_int(key, v);
    else if (key == "replicas") c.replicas = static_cast<int>(to_int(key, v));
    else if (key == "tv_steps") c.tv_steps = to_int(key, v);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(key, v));
    else if (key == "out") c.out_dir = v;
    else if (key == "cap_states") c.cap_states = static_cast<int>(to_int(key, v));
    else if (key == "cap_exact") c.cap_exact = static_cast<int>(to_int(key, v));
    else throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (c.cap_states <= 0 || c.cap_exact <= 0) throw std::invalid_argument("config: caps must be positive");
  if (c.steps < 0 || c.replicas < 1 || c.tv_steps < 0) throw std::invalid_argument("config: steps, replicas out of range");
  if (c.b && *c.b < 1) throw std::invalid_argument("config: b must be positive");
  if (!(c.chain.lambda > 0) || c.chain.q < 1 || c.n < 0) throw std::invalid_argument("config: lambda, q or n out of range");
  return c;
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  if (!c.graph_file.empty()) os << "graph = " << c.graph_file << '\n';
  else os << "family = " << family_name(c.family) << "\nn = " << c.n << "\nk = " << c.k << "\ngraph_seed = " << c.graph_seed << '\n';
  os << "chain = " << chain_name(c.chain.kind) << "\nlambda = " << c.chain.lambda << "\nq = " << c.chain.q << '\n';
  if (c.b) os << "b = " << *c.b << '\n';
  os << "mode = " << mode_name(c.mode) << "\nsteps = " << c.steps << "\nreplicas = " << c.replicas
     << "\ntv_steps = " << c.tv_steps << "\nseed = " << c.seed << "\nout = " << c.out_dir
     << "\ncap_states = " << c.cap_states << "\ncap_exact = " << c.cap_exact << '\n';
  return os.str();
}

Graph config_graph(const ExperimentConfig& c) {
  Graph g = c.graph_file.empty() ? generate(c.family, c.n, c.graph_seed, c.k) : load_graph(c.graph_file, c.chain.q);
  if (c.b) g.set_b_values(std::vector<int>(g.n(), *c.b));
  return g;
}

namespace {

std::string num(const std::optional<double>& x) {
  if (!x) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", *x);
  return buf;
}

template <class T>
std::string opt(const std::optional<T>& x) {
  return x ? std::to_string(*x) : "NA";
}

std::string graph_label(const ExperimentConfig& c) {
  if (!c.graph_file.empty()) return std::filesystem::path(c.graph_file).filename().string();
  std::ostringstream os;
  os << family_name(c.family) << '-' << c.n;
  if (c.k) os << "-k" << c.k;
  if (c.graph_seed) os << "-s" << c.graph_seed;
  return os.str();
}

const char* const kBoundCols[] = {"expansion_mixing", "conductance_mixing", "nonhier_mixing", "hier_mixing",
                                  "chain_mixing"};

}  // namespace

bool RunReport::ok() const {
  for (const auto& c : checks)
    if (c.ran && !c.pass) return false;
  return true;
}

std::string RunReport::csv_header() {
  std::string h =
      "# gd-run-csv v1\n"
      "graph,n,m,chain,lambda,q,b,mode,seed,steps,states,connected,delta_M,classes,detailed_balance,fixed_point,"
      "rho,rho_weighted,expansion_lower,conductance_lower,h,phi,tau";
  for (const char* b : kBoundCols) h += std::string(",log2_") + b;
  return h + ",empirical_tv,final_state,checks_passed,checks_failed,checks_skipped";
}

std::string RunReport::csv_row() const {
  std::ostringstream os;
  const auto& c = config;
  os << graph_name << ',' << n << ',' << m << ',' << chain_name(c.chain.kind) << ',' << num(c.chain.lambda) << ','
     << c.chain.q << ',' << opt(c.b) << ',' << mode_name(c.mode) << ',' << c.seed << ',' << c.steps << ','
     << opt(states) << ',' << (connected ? (*connected ? "true" : "false") : "NA") << ',' << opt(delta_M) << ','
     << opt(classes) << ',' << num(detailed_balance) << ',' << num(fixed_point) << ',' << num(rho) << ','
     << num(rho_weighted) << ',';
  auto lower = [&](const std::optional<double>& r) { return r && *r > 0 ? std::optional<double>(1 / (2 * *r)) : std::nullopt; };
  os << num(lower(rho)) << ',' << num(lower(rho_weighted)) << ',' << num(h) << ',' << num(phi) << ',' << opt(tau);
  for (const char* b : kBoundCols) {
    const BoundEntry* e = bounds ? bounds->find(b) : nullptr;
    os << ',' << (e && e->applicable ? num(e->log2_value) : "NA");
  }
  int passed = 0, failed = 0, skipped = 0;
  for (const auto& ch : checks) (ch.ran ? (ch.pass ? passed : failed) : skipped)++;
  os << ',' << num(empirical_tv) << ',' << (final_state ? *final_state : "NA") << ',' << passed << ',' << failed << ','
     << skipped;
  return os.str();
}

std::string RunReport::tv_csv() const {
  std::ostringstream os;
  os << "# gd-tv-csv v1\nt,empirical,exact\n";
  for (const auto& p : tv) os << p.t << ',' << num(p.empirical) << ',' << num(p.exact) << '\n';
  return os.str();
}

std::string RunReport::summary() const {
  std::ostringstream os;
  os << "graph " << graph_name << " (n=" << n << ", m=" << m << "), chain " << chain_name(config.chain.kind)
     << ", mode " << mode_name(config.mode) << '\n';
  if (states) os << "states " << *states << '\n';
  if (bounds) os << bounds->text();
  for (const auto& c : checks) {
    os << (c.ran ? (c.pass ? "PASS " : "FAIL ") : "SKIP ") << c.name;
    if (!c.detail.empty()) os << ": " << c.detail;
    os << '\n';
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "wall %.3f s\n", seconds);
  os << buf << (ok() ? "ok\n" : "FAILED\n");
  return os.str();
}

RunReport run_experiment(const ExperimentConfig& c, bool write) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport r;
  r.config = c;
  r.graph_name = graph_label(c);
  const Graph g = config_graph(c);
  check_params(g, c.chain);
  r.n = g.n();
  r.m = g.m();
  auto skip = [&](const char* name, std::string why) { r.checks.push_back({name, false, false, std::move(why)}); };
  auto check = [&](const char* name, bool pass, std::string detail = {}) {
    r.checks.push_back({name, true, pass, std::move(detail)});
  };

  std::optional<StateSpace> sp;
  if (c.mode != Mode::simulate) {
    try {
      sp = build_state_space(g, c.chain, c.cap_states);
    } catch (const CapExceeded& e) {
      if (c.mode != Mode::full) throw;
      skip("connected", e.what());
    }
  }
  const bool exact_ok = sp && sp->size() <= c.cap_exact;
  if (sp) {
    r.states = sp->size();
    r.delta_M = sp->delta_M;
    const Connectivity conn = check_connectivity(*sp);
    r.connected = conn.connected;
    check("connected", conn.connected, conn.connected ? "" : std::to_string(conn.components) + " components");
  }
  if (exact_ok && r.connected.value_or(false)) {
    const Stationary st = exact_stationary(*sp);
    r.detailed_balance = st.detailed_balance_residual;
    r.fixed_point = st.fixed_point_residual;
    check("reversible", st.detailed_balance_residual < 1e-12 && st.fixed_point_residual < 1e-10);
  } else {
    skip("reversible", sp ? "state space above the exact cap or disconnected" : "no state space");
  }

  BoundParams bp;
  const bool want_flow = c.mode == Mode::flow || c.mode == Mode::full;
  const bool want_exact = c.mode == Mode::exact || c.mode == Mode::full;
  if (sp) {
    std::optional<ClassPartition> part;
    std::vector<SubclassCover> covers;
    const bool relaxed = needs_subclasses(c.chain.kind);
    if (want_flow) {
      try {
        const Separator sep = find_balanced_separator(g, compute_decomposition(g));
        part = partition_by_trace(*sp, sep);
        r.classes = part->size();
        bool certified = true;
        std::string witness;
        for (int k = 0; k < part->size(); ++k) {
          if (relaxed) {
            covers.push_back(subclass_decompose(*sp, *part, k));
            if (!covers.back().all_certified || !covers.back().union_ok) certified = false, witness = part->label(k);
          } else {
            const ProductCertificate cert = certify_cartesian_product(*sp, *part, k);
            if (!cert.ok()) certified = false, witness = cert.witness;
          }
        }
        check("certified", certified, witness);
      } catch (const std::exception& e) {
        check("certified", false, e.what());
      }
    }
    bp = measure_params(*sp, part ? &*part : nullptr, relaxed && !covers.empty() ? &covers : nullptr);
    if (bp.h) r.h = bp.h;
    if (bp.phi) r.phi = bp.phi;
    if (want_flow && part && sp->size() <= c.cap_exact) {
      try {
        FlowOptions o;
        o.exact_cap = c.cap_exact;
        Flow fu = build_flow(*sp, o);
        Flow fw = reweight_flow(fu, *sp, o);
        r.rho = bp.rho = congestion(fu);
        r.rho_weighted = bp.rho_weighted = congestion(fw);
        check("flow_valid", fu.valid() && fw.valid());
        if (sp->size() <= 20 && bp.h && bp.phi)
          check("sandwich", *bp.h >= 1 / (2 * *r.rho) - 1e-9 && *bp.phi >= 1 / (2 * *r.rho_weighted) - 1e-9);
        else
          skip("sandwich", "more than 20 states");
      } catch (const std::exception& e) {
        check("flow_valid", false, e.what());
      }
    } else if (want_flow) {
      skip("flow_valid", "state space above the exact cap");
    }
    if (want_exact && exact_ok && r.connected.value_or(false)) {
      r.tau = exact_mixing_time(*sp, 0.25, c.cap_exact);
      r.bounds = bound_report(bp, r.tau);
      check("bounds_consistent", r.bounds->consistent());
    } else if (want_exact) {
      skip("bounds_consistent", "no exact mixing time");
    }
  }

  if (c.mode == Mode::simulate || c.mode == Mode::full) {
    if (c.mode == Mode::full && exact_ok && r.connected.value_or(false)) {
      const StateSpace site_sp = is_maximal_chain(c.chain.kind)
                                     ? *sp
                                     : build_state_space(g, c.chain, c.cap_states, Normalizer::sites);
      const std::vector<double> freq = empirical_distribution(site_sp, c.steps, c.seed);
      r.empirical_tv = total_variation(freq, site_sp.pi);
      r.tv = empirical_tv(site_sp, c.tv_steps, c.replicas, substream_seed(c.seed, 1), {}, c.cap_exact);
    }
    const SimResult sim = simulate_chain(g, c.chain, c.steps, c.seed, sp ? sp->normalizer : 0);
    r.final_state = state_hex(sim.final_state);
    check("simulation_valid", is_valid_state(g, c.chain, sim.final_state));
  }

  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (write && !c.out_dir.empty()) {
    std::filesystem::create_directories(c.out_dir);
    auto put = [&](const char* name, const std::string& text) {
      std::ofstream f(std::filesystem::path(c.out_dir) / name, std::ios::binary);
      if (!f) throw std::runtime_error(std::string("cannot write ") + name);
      f << text;
    };
    put("report.csv", RunReport::csv_header() + "\n" + r.csv_row() + "\n");
    if (!r.tv.empty()) put("tv.csv", r.tv_csv());
    put("summary.txt", r.summary());
  }
  return r;
}

}  // namespace gd
