#include "gd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gd/decomposition.hpp"

namespace gd {

namespace {

template <class T>
T need(const std::optional<T>& v, const char* what, const char* form) {
  if (!v) throw BoundError(std::string(form) + ": missing parameter " + what);
  return *v;
}

double lg(double x) { return std::log2(x); }

BoundEntry entry(const char* name, double log2_value, std::string note = {}) {
  BoundEntry e;
  e.name = name;
  e.log2_value = log2_value;
  e.note = std::move(note);
  return e;
}

BoundEntry not_applicable(const char* name, std::string why) {
  BoundEntry e;
  e.name = name;
  e.applicable = false;
  e.note = std::move(why);
  return e;
}

// log2 of (2 log n) * log2(base) + log2(Delta_M^2 log N)
double level_form(double base, const BoundParams& p, const char* form) {
  const double n = need(p.n, "n", form);
  const double N = static_cast<double>(need(p.N, "N", form));
  const double dm = static_cast<double>(need(p.delta_M, "delta_M", form));
  if (N < 2 || dm == 0) return -std::numeric_limits<double>::infinity();
  return 2 * lg(n) * lg(base) + 2 * lg(dm) + lg(lg(N));
}

bool unit_lambda(const BoundParams& p) { return p.lambda == 1 || is_uniform_chain(p.kind); }

}  // namespace

double BoundEntry::value() const {
  return log2_value > 1000 ? std::numeric_limits<double>::infinity() : std::exp2(log2_value);
}

BoundParams measure_params(const StateSpace& sp, const ClassPartition* part, const std::vector<SubclassCover>* covers) {
  BoundParams p;
  const Graph& g = sp.graph;
  p.kind = sp.params.kind;
  p.lambda = is_uniform_chain(p.kind) ? 1.0 : sp.params.lambda;
  p.n = g.n();
  p.m = g.m();
  p.t = g.n() > 0 ? decomposition_width(compute_decomposition(g)) : 0;
  p.Delta = g.max_degree();
  int b = 1;
  for (int v = 0; v < g.n(); ++v) b = std::max(b, g.b(v));
  p.b = b;
  p.q = sp.params.q;
  p.N = sp.size();
  p.delta_M = sp.delta_M;
  p.pi_min = sp.size() ? *std::min_element(sp.pi.begin(), sp.pi.end()) : 0.0;
  if (sp.size() >= 2 && sp.size() <= kDefaultCutLimit) {
    p.h = exact_expansion(sp).value();
    p.phi = exact_conductance(sp);
  }
  if (part) {
    p.K = part->size();
    for (const auto& [key, es] : part->boundary)
      p.E_min = std::min<long long>(p.E_min.value_or(es.size()), static_cast<long long>(es.size()));
  }
  if (covers)
    for (const auto& c : *covers)
      for (const auto& [i, j, shared] : c.overlaps) p.O_min = std::min<long long>(p.O_min.value_or(shared), shared);
  return p;
}

BoundEntry expansion_lower(const BoundParams& p) {
  const double rho = need(p.rho, "rho", "expansion_lower");
  if (rho <= 0) return not_applicable("expansion_lower", "zero congestion");
  return entry("expansion_lower", -lg(2 * rho));
}

BoundEntry conductance_lower(const BoundParams& p) {
  const double rho = need(p.rho_weighted, "rho_weighted", "conductance_lower");
  if (rho <= 0) return not_applicable("conductance_lower", "zero congestion");
  return entry("conductance_lower", -lg(2 * rho));
}

BoundEntry expansion_mixing(const BoundParams& p) {
  const char* name = "expansion_mixing";
  if (!unit_lambda(p)) return not_applicable(name, "holds for unit transition rates only");
  const double N = static_cast<double>(need(p.N, "N", name));
  if (N < 2) return not_applicable(name, "fewer than two states");
  double h;
  std::string note = "exact h";
  if (p.h) {
    h = *p.h;
  } else {
    h = 1 / (2 * need(p.rho, "rho or h", name));
    note = "h from 1/(2 rho)";
  }
  const double dm = static_cast<double>(need(p.delta_M, "delta_M", name));
  return entry(name, 2 * lg(dm) - 2 * lg(h) + lg(std::log(N / p.epsilon)), note);
}

BoundEntry conductance_mixing(const BoundParams& p) {
  const char* name = "conductance_mixing";
  const double N = static_cast<double>(need(p.N, "N", name));
  if (N < 2) return not_applicable(name, "fewer than two states");
  double phi;
  std::string note = "exact phi";
  if (p.phi) {
    phi = *p.phi;
  } else {
    phi = 1 / (2 * need(p.rho_weighted, "rho_weighted or phi", name));
    note = "phi from 1/(2 rho_weighted)";
  }
  const double pm = need(p.pi_min, "pi_min", name);
  return entry(name, -2 * lg(phi) + lg(lg(1 / (pm * p.epsilon))), note);
}

BoundEntry nonhier_mixing(const BoundParams& p) {
  const char* name = "nonhier_mixing";
  const Variant v = default_variant(p.kind);
  if (v != Variant::nonhier && v != Variant::relaxed_nonhier) return not_applicable(name, "hierarchical chain");
  const double N = static_cast<double>(need(p.N, "N", name));
  const long long K = need(p.K, "K", name);
  double ratio = 0;
  if (K > 1) {
    long long e = need(p.E_min, "E_min", name);
    if (v == Variant::relaxed_nonhier && p.O_min) e = std::min(e, *p.O_min);
    ratio = 2 * N / static_cast<double>(e);
  }
  return entry(name, level_form(ratio + 1, p, name));
}

BoundEntry hier_mixing(const BoundParams& p) {
  const char* name = "hier_mixing";
  const Variant v = default_variant(p.kind);
  if (v != Variant::hier && v != Variant::relaxed_hier) return not_applicable(name, "non-hierarchical chain");
  if (!unit_lambda(p)) return not_applicable(name, "stated for the unweighted chain");
  const double K = static_cast<double>(need(p.K, "K", name));
  return entry(name, level_form(2 * K + 1, p, name));
}

BoundEntry chain_mixing(const BoundParams& p) {
  const char* name = "chain_mixing";
  const double lh = p.lambda_hat();
  const double lam = p.lambda;
  const double L = 1 + lg(lh);
  const double n = need(p.n, "n", name);
  const double t = need(p.t, "t", name);
  const double ln_ = lg(n);  // log2 n
  // log2 of ((1 + lh) lh)^2 (1 + log lh)
  const double pre = 2 * lg((1 + lh) * lh) + lg(L);
  switch (p.kind) {
    case ChainKind::independent_set:
      return entry(name, pre + (2 * (t + 2) * L + 5) * ln_, "hardcore");
    case ChainKind::q_coloring: {
      const double q = need(p.q, "q", name);
      const double D = need(p.Delta, "Delta", name);
      return entry(name, 2 * lg(q - 1) + lg(lg(q)) + (4 * (t + 1) * D * lg(q) + 7) * ln_, "colorings");
    }
    case ChainKind::partial_q_coloring: {
      if (lam != 1) return not_applicable(name, "closed form stated for the unbiased chain");
      const double q = need(p.q, "q", name);
      return entry(name, 2 * lg(q) + lg(lg(q + 1)) + (2 * (t + 2) * lg(q + 1) + 5) * ln_, "partial colorings");
    }
    case ChainKind::b_edge_cover: {
      const double m = need(p.m, "m", name);
      const double b = need(p.b, "b", name);
      if (m == 0) return entry(name, -std::numeric_limits<double>::infinity(), "no edges");
      const double tt = t + 1;
      const double expo = 2 * (3 + lg(1 + lam) - lg(lam) + tt * lg(b + 1) + (tt * (b + t / 2) + 1) * L) / lg(6.0 / 5);
      return entry(name, 2 * 36 * tt * tt * lg(2 * lh) + 2 * lg(lh / (1 + lh)) + 3 * lg(m) + lg(L) + expo * ln_,
                   "b-edge covers");
    }
    case ChainKind::b_matching: {
      const double m = need(p.m, "m", name);
      const double D = need(p.Delta, "Delta", name);
      if (m == 0) return entry(name, -std::numeric_limits<double>::infinity(), "no edges");
      return entry(name, pre + 3 * lg(m) + (2 * D * (t + 2) * L + 2) * ln_, "b-matchings");
    }
    case ChainKind::csds: {
      const double expo = 2 * (2 + lg((1 + lam) / lam) + (t + 2) * (3 + lg(lh))) / lg(6.0 / 5) + 3;
      return entry(name, 12 * (t + 1) * lg(2 * lh) + 2 * lg(lh / (1 + lh)) + lg(L) + expo * ln_, "dominating sets");
    }
    case ChainKind::maximal_independent_set: {
      const double D = need(p.Delta, "Delta", name);
      return entry(name, 6 * D * D + (2 * (t + 1) * (7 * std::pow(D, 6) + D + 1) + 7) * ln_, "maximal independent sets");
    }
    case ChainKind::maximal_b_matching: {
      const double m = need(p.m, "m", name);
      const double D = need(p.Delta, "Delta", name);
      if (m == 0) return entry(name, -std::numeric_limits<double>::infinity(), "no edges");
      return entry(name, 12 * D * D + 3 * lg(m) + (2 * (t + 1) * (8 * std::pow(D, 7) + 3 * D * D) + 4) * ln_,
                   "maximal b-matchings");
    }
  }
  return not_applicable(name, "unknown chain");
}

bool BoundReport::consistent() const {
  if (!tau || *tau == 0) return true;
  const double lt = std::log2(static_cast<double>(*tau));
  for (const auto& e : entries)
    if (e.applicable && e.name.find("mixing") != std::string::npos && e.log2_value < lt) return false;
  return true;
}

const BoundEntry* BoundReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

std::string BoundReport::text() const {
  std::ostringstream os;
  os.precision(10);
  os << "chain = " << chain_name(params.kind) << "\nlambda = " << params.lambda << '\n';
  if (tau) os << "tau = " << *tau << '\n';
  for (const auto& e : entries) {
    os << e.name << " = ";
    if (!e.applicable) os << "n/a";
    else os << e.value() << " (log2 " << e.log2_value << ")";
    if (!e.note.empty()) os << "  # " << e.note;
    os << '\n';
  }
  os << "consistent = " << (consistent() ? "yes" : "no") << '\n';
  return os.str();
}

namespace {
const char* const kEntryNames[] = {"expansion_lower",    "conductance_lower", "expansion_mixing",
                                   "conductance_mixing", "nonhier_mixing",    "hier_mixing",
                                   "chain_mixing"};
}

std::string BoundReport::csv_header() {
  std::string h = "chain,lambda,tau";
  for (const char* n : kEntryNames) h += std::string(",log2_") + n;
  return h + ",consistent";
}

std::string BoundReport::csv_row() const {
  std::ostringstream os;
  os.precision(10);
  os << chain_name(params.kind) << ',' << params.lambda << ',';
  if (tau) os << *tau;
  else os << "NA";
  for (const char* n : kEntryNames) {
    os << ',';
    const BoundEntry* e = find(n);
    if (e && e->applicable) os << e->log2_value;
    else os << "NA";
  }
  os << ',' << (consistent() ? 1 : 0);
  return os.str();
}

BoundReport bound_report(const BoundParams& p, std::optional<int> tau) {
  BoundReport r;
  r.params = p;
  r.tau = tau;
  using Fn = BoundEntry (*)(const BoundParams&);
  const Fn fns[] = {expansion_lower, conductance_lower, expansion_mixing, conductance_mixing,
                    nonhier_mixing,  hier_mixing,       chain_mixing};
  for (size_t i = 0; i < std::size(fns); ++i) {
    try {
      r.entries.push_back(fns[i](p));
    } catch (const BoundError& e) {
      r.entries.push_back(not_applicable(kEntryNames[i], e.what()));
    }
  }
  return r;
}

}  // namespace gd
