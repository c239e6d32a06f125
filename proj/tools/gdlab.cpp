#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gd/bounds.hpp"
#include "gd/flow.hpp"
#include "gd/lab.hpp"

using namespace gd;

namespace {

struct Options {
  std::string graph, family = "path", chain = "independent_set", mode = "exact", out, config;
  int n = 3, k = 0, q = 3, b = 0, replicas = 1000;
  std::uint64_t seed = 0, sim_seed = 1;
  double lambda = 1;
  long long steps = 100000;
  int cap_states = kDefaultStateCap, cap_exact = kDefaultExactCap;
  bool weighted = false, dump = false;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("--graph", o.graph, "edge-list file");
  app->add_option("--family", o.family, "path, cycle, complete, random_tree, partial_k_tree, grid");
  app->add_option("--n", o.n, "generator size");
  app->add_option("--k", o.k, "width for partial_k_tree, columns for grid");
  app->add_option("--seed", o.seed, "generator seed");
  app->add_option("--chain", o.chain, "chain kind");
  app->add_option("--lambda", o.lambda, "fugacity");
  app->add_option("--q", o.q, "number of colors");
  app->add_option("--b", o.b, "uniform b value (b-problems)");
  app->add_option("--cap-states", o.cap_states, "state enumeration cap");
  app->add_option("--cap-exact", o.cap_exact, "exact-mode cap");
  app->add_option("--out", o.out, "output directory or file");
}

ExperimentConfig to_config(const Options& o) {
  ExperimentConfig c;
  c.graph_file = o.graph;
  c.family = parse_family(o.family);
  c.n = o.n;
  c.k = o.k;
  c.graph_seed = o.seed;
  c.chain = {parse_chain(o.chain), o.lambda, o.q};
  if (o.b > 0) c.b = o.b;
  c.mode = parse_mode(o.mode);
  c.steps = o.steps;
  c.replicas = o.replicas;
  c.seed = o.sim_seed;
  c.cap_states = o.cap_states;
  c.cap_exact = o.cap_exact;
  if (!o.out.empty()) c.out_dir = o.out;
  return c;
}

// Writes to --out when given, else stdout.
void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + o.out);
  f << text;
}

StateSpace space(const Options& o, Normalizer norm = Normalizer::delta_M) {
  const ExperimentConfig c = to_config(o);
  return build_state_space(config_graph(c), c.chain, o.cap_states, norm);
}

ClassPartition partition(const StateSpace& sp) {
  return partition_by_trace(sp, find_balanced_separator(sp.graph, compute_decomposition(sp.graph)));
}

std::vector<SubclassCover> covers_of(const StateSpace& sp, const ClassPartition& part) {
  std::vector<SubclassCover> out;
  if (needs_subclasses(sp.params.kind))
    for (int k = 0; k < part.size(); ++k) out.push_back(subclass_decompose(sp, part, k));
  return out;
}

int cmd_build_space(const Options& o) {
  const StateSpace sp = space(o);
  if (o.dump) {
    emit(o, dump_state_space(sp));
    return 0;
  }
  const Connectivity c = check_connectivity(sp);
  std::ostringstream os;
  os << "states = " << sp.size() << "\nedges = " << sp.edges.size() << "\ndelta_M = " << sp.delta_M
     << "\nconnected = " << (c.connected ? "true" : "false") << "\ncomponents = " << c.components << '\n';
  emit(o, os.str());
  return c.connected ? 0 : 1;
}

int cmd_partition(const Options& o) {
  const StateSpace sp = space(o);
  const ClassPartition part = partition(sp);
  std::string text = partition_report(sp, part);
  const auto covers = covers_of(sp, part);
  const ConditionReport rep =
      verify_framework_conditions(sp, part, default_variant(sp.params.kind), covers.empty() ? nullptr : &covers);
  emit(o, text + rep.text());
  return rep.ok() ? 0 : 1;
}

int cmd_certify(const Options& o) {
  const StateSpace sp = space(o);
  const ClassPartition part = partition(sp);
  std::ostringstream os;
  bool ok = true;
  if (needs_subclasses(sp.params.kind)) {
    for (const auto& cov : covers_of(sp, part)) {
      os << "class " << part.label(cov.cls) << ": " << cov.subclasses.size() << " subclasses, union "
         << (cov.union_ok ? "ok" : "FAIL") << ", max ratio " << cov.max_size_ratio << '\n';
      for (const auto& s : cov.subclasses) {
        os << "  " << s.label << " size " << s.cert.members.size() << (s.cert.ok() ? " ok" : " FAIL " + s.cert.witness)
           << '\n';
        ok = ok && s.cert.ok();
      }
      ok = ok && cov.union_ok;
    }
  } else {
    for (int k = 0; k < part.size(); ++k) {
      const ProductCertificate c = certify_cartesian_product(sp, part, k);
      os << "class " << part.label(k) << ": " << c.space_a.size() << " x " << c.space_b.size() << " = "
         << c.members.size() << (c.ok() ? " ok" : " FAIL " + c.witness) << '\n';
      ok = ok && c.ok();
    }
  }
  emit(o, os.str());
  return ok ? 0 : 1;
}

int cmd_flow(const Options& o) {
  const StateSpace sp = space(o);
  FlowOptions fo;
  fo.exact_cap = o.cap_exact;
  Flow f = build_flow(sp, fo);
  if (o.weighted) f = reweight_flow(f, sp, fo);
  if (o.dump) {
    emit(o, dump_flow(f));
    return f.valid() ? 0 : 1;
  }
  std::ostringstream os;
  os.precision(12);
  os << "construction = " << f.construction << "\nvariant = " << variant_name(f.variant)
     << "\ndemand = " << demand_name(f.demand) << "\ncommodities = " << f.commodities << "\ndepth = " << f.depth
     << "\ncongestion = " << congestion(f) << "\nmax_conservation_error = " << f.max_conservation_error
     << "\nexact = " << (f.exact ? "true" : "false") << "\nvalid = " << (f.valid() ? "true" : "false") << '\n';
  emit(o, os.str());
  return f.valid() ? 0 : 1;
}

int cmd_bounds(const Options& o, bool csv) {
  const StateSpace sp = space(o);
  const ClassPartition part = partition(sp);
  const auto covers = covers_of(sp, part);
  BoundParams bp = measure_params(sp, &part, covers.empty() ? nullptr : &covers);
  if (check_connectivity(sp).connected && sp.size() <= o.cap_exact) {
    FlowOptions fo;
    fo.exact_cap = o.cap_exact;
    const Flow f = build_flow(sp, fo);
    bp.rho = congestion(f);
    bp.rho_weighted = congestion(reweight_flow(f, sp, fo));
  }
  std::optional<int> tau;
  if (sp.size() <= o.cap_exact && check_connectivity(sp).connected) tau = exact_mixing_time(sp, 0.25, o.cap_exact);
  const BoundReport r = bound_report(bp, tau);
  emit(o, csv ? BoundReport::csv_header() + "\n" + r.csv_row() + "\n" : r.text());
  return r.consistent() ? 0 : 1;
}

int cmd_mix_exact(const Options& o, double eps) {
  const StateSpace sp = space(o);
  const int tau = exact_mixing_time(sp, eps, o.cap_exact);
  std::ostringstream os;
  os << "states = " << sp.size() << "\nepsilon = " << eps << "\ntau = " << tau << '\n';
  emit(o, os.str());
  return 0;
}

int cmd_simulate(const Options& o) {
  const ExperimentConfig c = to_config(o);
  const Graph g = config_graph(c);
  const SimResult r = simulate_chain(g, c.chain, o.steps, o.sim_seed);
  std::ostringstream os;
  os << "steps = " << r.steps << "\naccepted = " << r.accepted << "\nfinal_state = " << state_hex(r.final_state)
     << "\nvalid = " << (is_valid_state(g, c.chain, r.final_state) ? "true" : "false") << '\n';
  emit(o, os.str());
  return 0;
}

int cmd_tv_curve(const Options& o) {
  const ChainKind kind = parse_chain(o.chain);
  const StateSpace sp = space(o, is_maximal_chain(kind) ? Normalizer::delta_M : Normalizer::sites);
  RunReport r;
  r.tv = empirical_tv(sp, o.steps, o.replicas, o.sim_seed, {}, o.cap_exact);
  emit(o, r.tv_csv());
  return 0;
}

int cmd_run(const Options& o) {
  ExperimentConfig c;
  if (!o.config.empty()) {
    std::ifstream f(o.config);
    if (!f) throw std::runtime_error("cannot read " + o.config);
    std::ostringstream os;
    os << f.rdbuf();
    c = parse_config(os.str());
    if (!o.out.empty()) c.out_dir = o.out;
  } else {
    c = to_config(o);
  }
  const RunReport r = run_experiment(c);
  std::cout << r.summary();
  return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Glauber dynamics lab: state spaces, flows, bounds and simulation"};
  app.require_subcommand(1);
  Options o;
  double eps = 0.25;
  bool csv = false;

  auto* build = app.add_subcommand("build-space", "enumerate the Glauber graph");
  add_common(build, o);
  build->add_flag("--dump", o.dump, "print the space as JSON");
  auto* part = app.add_subcommand("partition", "trace classes and framework conditions");
  add_common(part, o);
  auto* cert = app.add_subcommand("certify", "Cartesian-product certificates per class or subclass");
  add_common(cert, o);
  auto* flow = app.add_subcommand("flow", "multicommodity flow and its congestion");
  add_common(flow, o);
  flow->add_flag("--weighted", o.weighted, "pi(s) pi(t) demands");
  flow->add_flag("--dump", o.dump, "per-commodity edge lists");
  auto* bounds = app.add_subcommand("bounds", "evaluated mixing bounds against the exact mixing time");
  add_common(bounds, o);
  bounds->add_flag("--csv", csv, "CSV row instead of key = value");
  auto* mix = app.add_subcommand("mix-exact", "exact mixing time by matrix iteration");
  add_common(mix, o);
  mix->add_option("--epsilon", eps, "TV threshold");
  auto* sim = app.add_subcommand("simulate", "run one chain without an explicit space");
  add_common(sim, o);
  sim->add_option("--steps", o.steps, "step budget");
  sim->add_option("--sim-seed", o.sim_seed, "simulation seed");
  auto* tv = app.add_subcommand("tv-curve", "cross-replica TV against the exact curve");
  add_common(tv, o);
  tv->add_option("--steps", o.steps, "last checkpoint")->default_val(256);
  tv->add_option("--replicas", o.replicas, "replica count");
  tv->add_option("--sim-seed", o.sim_seed, "simulation seed");
  auto* run = app.add_subcommand("run", "config-driven experiment writing report.csv and summary.txt");
  add_common(run, o);
  run->add_option("config", o.config, "key = value config file");
  run->add_option("--mode", o.mode, "exact, simulate, flow or full");
  run->add_option("--steps", o.steps, "step budget");
  run->add_option("--replicas", o.replicas, "replica count");
  run->add_option("--sim-seed", o.sim_seed, "simulation seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*build) return cmd_build_space(o);
    if (*part) return cmd_partition(o);
    if (*cert) return cmd_certify(o);
    if (*flow) return cmd_flow(o);
    if (*bounds) return cmd_bounds(o, csv);
    if (*mix) return cmd_mix_exact(o, eps);
    if (*sim) return cmd_simulate(o);
    if (*tv) return cmd_tv_curve(o);
    if (*run) return cmd_run(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
