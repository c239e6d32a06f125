// Acceptance run over the generated corpus. Prints one PASS/FAIL line per
// criterion and exits nonzero when any criterion fails.
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gd/bounds.hpp"
#include "gd/corpus.hpp"
#include "gd/flow.hpp"
#include "gd/lab.hpp"

using namespace gd;

namespace {

// Caps and tolerances.
constexpr int kSpaceCap = kDefaultStateCap;  // explicit spaces (criteria 2-6, 12)
constexpr int kFlowCap = 2000;               // flows and exact mixing (7, 10)
constexpr int kSandwichCap = 20;
constexpr int kSamplingCap = 60;
constexpr long long kSamplingSteps = 1000000;
constexpr double kSamplingTv = 0.02;
constexpr double kDetailedBalanceTol = 1e-12;
constexpr double kFixedPointTol = 1e-10;
constexpr double kFlowTol = 1e-9;
constexpr double kCombinerTol = 1e-9;
constexpr double kSandwichTol = 1e-9;
constexpr double kFactorTol = 1e-12;
constexpr int kRandomPairs = 100;
constexpr int kMaxFactorVertices = 50;

struct Tally {
  long long checked = 0, failed = 0, skipped = 0;
  std::vector<std::string> failures;
  std::string extra;

  void check(bool ok, const std::string& what) {
    ++checked;
    if (ok) return;
    ++failed;
    if (failures.size() < 3) failures.push_back(what);
  }
  void skip() { ++skipped; }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Brute-force count of independent sets.
long long count_independent_sets(const Graph& g) {
  long long c = 0;
  for (long long mask = 0; mask < (1LL << g.n()); ++mask) {
    bool ok = true;
    for (auto [u, v] : g.edges())
      if ((mask >> u & 1) && (mask >> v & 1)) ok = false;
    c += ok;
  }
  return c;
}

void criterion1(Tally& t) {
  std::vector<long long> fib = {0, 1};
  for (int i = 2; i <= 14; ++i) fib.push_back(fib[i - 1] + fib[i - 2]);
  const ChainParams is{ChainKind::independent_set, 1.0, 3};
  for (int n = 1; n <= 12; ++n) {
    const Graph g = generate(Family::path, n);
    const long long got = static_cast<long long>(enumerate_states(g, is).size());
    t.check(got == fib[n + 2] && got == count_independent_sets(g), "path-" + std::to_string(n));
  }
  for (int n = 3; n <= 12; ++n) {
    const Graph g = generate(Family::cycle, n);
    const long long lucas = fib[n - 1] + fib[n + 1];
    const long long got = static_cast<long long>(enumerate_states(g, is).size());
    t.check(got == lucas && got == count_independent_sets(g), "cycle-" + std::to_string(n));
  }
}

void random_pairs(Tally& t) {
  FlowOptions o;
  o.demand = Demand::weighted;
  for (int i = 0; i < kRandomPairs; ++i) {
    SplitMix64 rng(substream_seed(2024, i));
    const int nh = 2 + static_cast<int>(rng.below(kMaxFactorVertices - 1));
    const int nj = 2 + static_cast<int>(rng.below(kMaxFactorVertices - 1));
    const Flow H = shortest_path_flow(random_flow_graph(nh, rng.next()), Demand::weighted, o);
    const Flow J = shortest_path_flow(random_flow_graph(nj, rng.next()), Demand::weighted, o);
    const Flow P = product_flow(H, J, o);
    const double bound = std::max(congestion(H), congestion(J));
    t.check(P.valid(kFlowTol) && congestion(P) <= bound + kCombinerTol,
            "random pair " + std::to_string(i) + ": " + fmt("%.6g", congestion(P)) + " > " + fmt("%.6g", bound));
  }
}

struct Run {
  Tally c[14];
  std::map<std::string, bool> factor_pairs_seen;
  long long below_default_floor = 0;
  long long applicable_bounds = 0;
  double worst_tv = 0, worst_db = 0, worst_fp = 0, worst_factor = 0, worst_combiner_gap = -1e300;
};

void class_factor_pair(Run& run, const ProductCertificate& cert, const std::string& where) {
  if (cert.space_a.size() < 2 || cert.space_b.size() < 2) return;
  const std::string key = format_graph(cert.space_a.graph) + chain_name(cert.space_a.params.kind) +
                          std::to_string(cert.space_a.params.lambda) + "|" + format_graph(cert.space_b.graph) +
                          std::to_string(cert.space_b.params.q);
  if (run.factor_pairs_seen.count(key)) return;
  run.factor_pairs_seen[key] = true;
  Tally& t = run.c[8];
  if (!check_connectivity(cert.space_a).connected || !check_connectivity(cert.space_b).connected) {
    t.check(false, where + ": disconnected factor");
    return;
  }
  FlowOptions o;
  o.demand = Demand::weighted;
  const Flow H = shortest_path_flow(flow_graph(cert.space_a), Demand::weighted, o);
  const Flow J = shortest_path_flow(flow_graph(cert.space_b), Demand::weighted, o);
  const Flow P = product_flow(H, J, o);
  const double bound = std::max(congestion(H), congestion(J));
  run.worst_combiner_gap = std::max(run.worst_combiner_gap, congestion(P) - bound);
  t.check(P.valid(kFlowTol) && congestion(P) <= bound + kCombinerTol, where + " factor product");
}

void run_instance(Run& run, const Instance& in, int index) {
  const std::string name = in.name();
  StateSpace sp;
  try {
    sp = build_state_space(in.graph, in.params, kSpaceCap);
  } catch (const CapExceeded&) {
    for (int k : {2, 3, 4, 5, 6, 7, 9, 10, 11, 12}) run.c[k].skip();
    return;
  }
  const int N = sp.size();
  const ChainKind kind = in.params.kind;
  const bool connected = check_connectivity(sp).connected;
  run.c[2].check(connected, name);

  const Stationary st = exact_stationary(sp);
  run.worst_db = std::max(run.worst_db, st.detailed_balance_residual);
  run.worst_fp = std::max(run.worst_fp, st.fixed_point_residual);
  run.c[3].check(st.detailed_balance_residual < kDetailedBalanceTol && st.fixed_point_residual < kFixedPointTol, name);

  const TreeDecomposition td = compute_decomposition(in.graph);
  const int width = decomposition_width(td);
  const Separator sep = find_balanced_separator(in.graph, td);
  const ClassPartition part = partition_by_trace(sp, sep);

  // Class structure.
  if (kind == ChainKind::independent_set)
    run.c[4].check(part.size() <= (1LL << sep.X.size()), name + ": class count");
  if (hierarchical_kind(kind)) {
    const TraceOrder order = build_trace_order(sp, part);
    run.c[4].check(order.sizes_ok && order.matching_ok, name + ": " + order.witness);
  }

  // Certificates, subclass covers and weight factorizations.
  const bool relaxed = needs_subclasses(kind);
  const bool weighted_at_2 = !is_uniform_chain(kind) && in.params.lambda == 2.0;
  std::vector<SubclassCover> covers;
  std::vector<const ProductCertificate*> certs;
  std::vector<ProductCertificate> class_certs;
  for (int k = 0; k < part.size(); ++k) {
    if (relaxed) {
      covers.push_back(subclass_decompose(sp, part, k));
    } else {
      class_certs.push_back(certify_cartesian_product(sp, part, k));
      run.c[5].check(class_certs.back().ok(), name + " class " + part.label(k) + ": " + class_certs.back().witness);
    }
  }
  for (const auto& c : class_certs) certs.push_back(&c);
  for (const auto& cov : covers) {
    const std::string where = name + " class " + part.label(cov.cls);
    for (const auto& s : cov.subclasses) {
      run.c[5].check(s.cert.ok(), where + " subclass " + s.label + ": " + s.cert.witness);
      certs.push_back(&s.cert);
    }
    run.c[6].check(cov.union_ok, where + ": union");
    if (kind == ChainKind::b_edge_cover) {
      const double cap = std::ldexp(1.0, in.b.value_or(1) * (width + 1));
      run.c[6].check(cov.max_size_ratio <= cap && cov.max_size_ratio <= cov.ratio_bound, where + ": ratio " +
                                                                                              fmt("%g", cov.max_size_ratio));
    } else if (kind == ChainKind::csds) {
      run.c[6].check(cov.max_size_ratio <= std::ldexp(1.0, cov.U_size), where + ": ratio " + fmt("%g", cov.max_size_ratio));
    }
    if (cov.min_overlap_fraction < FlowOptions{}.overlap_floor) ++run.below_default_floor;
  }
  if (weighted_at_2) {
    for (const auto* c : certs) {
      if (!c->ok()) continue;
      const WeightFactorCheck w = weight_factorization(sp, *c);
      const double r = std::max(w.vertex_residual, w.edge_residual);
      run.worst_factor = std::max(run.worst_factor, r);
      run.c[12].check(w.edges_checked && r <= kFactorTol, name + " " + c->label + ": " + fmt("%.3g", r));
    }
  }

  if (N > kFlowCap || !connected) {
    for (int k : {7, 9, 10}) run.c[k].skip();
  } else {
    FlowOptions o;
    o.overlap_floor = 0;  // validity is checked on every instance; overlaps are reported
    std::vector<std::pair<std::string, Flow>> uniform, weighted;
    try {
      Flow f = build_flow(sp, o);
      Flow w = reweight_flow(f, sp, o);
      uniform.emplace_back(f.construction, std::move(f));
      weighted.emplace_back(w.construction, std::move(w));
      if (hierarchical_kind(kind) && !relaxed) {
        Flow g = build_flow(sp, Variant::nonhier, o);
        Flow gw = reweight_flow(g, sp, o);
        uniform.emplace_back(g.construction, std::move(g));
        weighted.emplace_back(gw.construction, std::move(gw));
      }
    } catch (const std::exception& e) {
      run.c[7].check(false, name + ": " + e.what());
    }
    for (auto* fs : {&uniform, &weighted})
      for (const auto& [what, f] : *fs)
        run.c[7].check(f.valid(kFlowTol) && f.exact, name + " " + what);
    for (const auto* c : certs)
      if (c->ok()) class_factor_pair(run, *c, name + " " + c->label);

    if (N <= kSandwichCap && N >= 2) {
      const double h = exact_expansion(sp).value();
      const double phi = exact_conductance(sp);
      for (const auto& [what, f] : uniform)
        run.c[9].check(h >= 1 / (2 * congestion(f)) - kSandwichTol, name + " " + what + ": h " + fmt("%.6g", h));
      for (const auto& [what, f] : weighted)
        run.c[9].check(phi >= 1 / (2 * congestion(f)) - kSandwichTol, name + " " + what + ": phi " + fmt("%.6g", phi));
    } else {
      run.c[9].skip();
    }

    BoundParams bp = measure_params(sp, &part, relaxed ? &covers : nullptr);
    if (!uniform.empty()) {
      bp.rho = congestion(uniform.front().second);
      bp.rho_weighted = congestion(weighted.front().second);
    }
    const int tau = exact_mixing_time(sp, 0.25, kFlowCap);
    const BoundReport rep = bound_report(bp, tau);
    for (const auto& e : rep.entries)
      if (e.applicable && e.name.find("mixing") != std::string::npos) ++run.applicable_bounds;
    std::string low;
    for (const auto& e : rep.entries)
      if (e.applicable && e.name.find("mixing") != std::string::npos && e.log2_value < std::log2(tau)) low = e.name;
    run.c[10].check(rep.consistent(), name + ": tau " + std::to_string(tau) + " above " + low);
  }

  if (N <= kSamplingCap && connected) {
    const bool maximal = is_maximal_chain(kind);
    const StateSpace sim = maximal ? sp : build_state_space(in.graph, in.params, kSpaceCap, Normalizer::sites);
    const std::vector<double> freq = empirical_distribution(sim, kSamplingSteps, substream_seed(99, index));
    const double tv = total_variation(freq, sim.pi);
    run.worst_tv = std::max(run.worst_tv, tv);
    bool ok = tv < kSamplingTv;
    if (maximal) {
      const std::vector<double> uniform(N, 1.0 / N);
      ok = ok && total_variation(sim.pi, uniform) < 1e-12 && total_variation(freq, uniform) < kSamplingTv;
    }
    run.c[11].check(ok, name + ": tv " + fmt("%.4f", tv));
  } else {
    run.c[11].skip();
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void criterion13(Tally& t) {
  const auto root = std::filesystem::temp_directory_path() / "gd-acceptance-determinism";
  std::vector<ExperimentConfig> configs;
  auto cfg = [&](Family f, int n, int k, ChainKind kind, double lam, int q, Mode mode) {
    ExperimentConfig c;
    c.family = f;
    c.n = n;
    c.k = k;
    c.graph_seed = 3;
    c.chain = {kind, lam, q};
    c.mode = mode;
    c.steps = 20000;
    c.replicas = 200;
    c.tv_steps = 32;
    c.seed = 11;
    configs.push_back(c);
  };
  cfg(Family::path, 4, 0, ChainKind::independent_set, 2.0, 3, Mode::full);
  cfg(Family::cycle, 5, 0, ChainKind::partial_q_coloring, 0.5, 3, Mode::full);
  cfg(Family::partial_k_tree, 7, 2, ChainKind::maximal_independent_set, 1.0, 3, Mode::full);
  cfg(Family::random_tree, 6, 0, ChainKind::csds, 1.0, 3, Mode::flow);
  cfg(Family::partial_k_tree, 200, 3, ChainKind::independent_set, 1.0, 3, Mode::simulate);
  const int threads = omp_get_max_threads();
  for (size_t i = 0; i < configs.size(); ++i) {
    std::string first;
    for (int rep = 0; rep < 3; ++rep) {
      ExperimentConfig c = configs[i];
      c.out_dir = (root / (std::to_string(i) + "-" + std::to_string(rep))).string();
      omp_set_num_threads(rep == 2 ? 3 : 1);
      run_experiment(c);
      std::string out = slurp(std::filesystem::path(c.out_dir) / "report.csv");
      if (std::filesystem::exists(std::filesystem::path(c.out_dir) / "tv.csv"))
        out += slurp(std::filesystem::path(c.out_dir) / "tv.csv");
      if (rep == 0) first = out;
      else t.check(out == first && !out.empty(), "config " + std::to_string(i) + " run " + std::to_string(rep));
    }
  }
  omp_set_num_threads(threads);
  std::filesystem::remove_all(root);
}

}  // namespace

int main() {
  using clk = std::chrono::steady_clock;
  const auto t0 = clk::now();
  Run run;
  criterion1(run.c[1]);
  random_pairs(run.c[8]);
  const auto instances = corpus_instances(corpus_graphs());
  for (size_t i = 0; i < instances.size(); ++i) {
    try {
      run_instance(run, instances[i], static_cast<int>(i));
    } catch (const std::exception& e) {
      run.c[2].check(false, instances[i].name() + ": " + e.what());
    }
  }
  criterion13(run.c[13]);

  run.c[3].extra = "max detailed balance " + fmt("%.2e", run.worst_db) + ", fixed point " + fmt("%.2e", run.worst_fp);
  run.c[7].extra = std::to_string(run.below_default_floor) + " subclass covers below the default overlap floor";
  run.c[8].extra = "worst corpus gap " + fmt("%.3g", run.worst_combiner_gap);
  run.c[10].extra = std::to_string(run.applicable_bounds) + " applicable bounds";
  run.c[11].extra = "worst tv " + fmt("%.4f", run.worst_tv);
  run.c[12].extra = "worst residual " + fmt("%.2e", run.worst_factor);

  const char* names[14] = {"",
                           "enumeration oracle",
                           "connectivity",
                           "reversibility",
                           "class structure",
                           "product certification",
                           "subclass covers",
                           "flow validity",
                           "cartesian combiner",
                           "expansion/conductance sandwich",
                           "mixing consistency",
                           "sampling fidelity",
                           "weight factorization",
                           "determinism"};
  bool all = true;
  std::printf("corpus: %zu instances\n", instances.size());
  for (int k = 1; k <= 13; ++k) {
    const Tally& t = run.c[k];
    const bool pass = t.failed == 0 && t.checked > 0;
    all = all && pass;
    std::printf("%s %2d %s: %lld checked, %lld failed, %lld skipped", pass ? "PASS" : "FAIL", k, names[k], t.checked,
                t.failed, t.skipped);
    if (!t.extra.empty()) std::printf("; %s", t.extra.c_str());
    for (const auto& f : t.failures) std::printf("\n       %s", f.c_str());
    std::printf("\n");
  }
  std::printf("wall %.1f s\n", std::chrono::duration<double>(clk::now() - t0).count());
  return all ? 0 : 1;
}
