#include "gd/state_space.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"

namespace gd {

namespace {

// ---- enumeration ----

enum class Check : std::uint8_t { edge_is, edge_color, csds_vertex, mis_vertex, cover_lower, cap_upper, mbm_edge };

struct CheckItem {
  Check kind;
  int a;
};

struct Enumerator {
  const Graph& g;
  const ChainParams& p;
  int sites;
  std::vector<std::vector<std::uint8_t>> domain;
  std::vector<std::vector<CheckItem>> at;  // checks run after assigning site i
  bool infeasible = false;

  Enumerator(const Graph& g_, const ChainParams& p_) : g(g_), p(p_), sites(num_sites(g_, p_)) {
    domain.resize(sites);
    at.resize(sites);
    for (int i = 0; i < sites; ++i) domain[i] = site_domain(i);
    auto add = [&](int last, Check c, int a) {
      if (last < 0) {
        // empty scope: evaluate once on the all-zero state
        State z(sites, 0);
        if (!run(c, a, z, -1)) infeasible = true;
        return;
      }
      at[last].push_back({c, a});
    };
    const int n = g.n();
    switch (p.kind) {
      case ChainKind::independent_set:
      case ChainKind::maximal_independent_set:
        for (int e = 0; e < g.m(); ++e) add(g.edges()[e].second, Check::edge_is, e);
        if (p.kind == ChainKind::maximal_independent_set)
          for (int v = 0; v < n; ++v) add(closed_last(v), Check::mis_vertex, v);
        break;
      case ChainKind::q_coloring:
      case ChainKind::partial_q_coloring:
        for (int e = 0; e < g.m(); ++e) add(g.edges()[e].second, Check::edge_color, e);
        break;
      case ChainKind::csds:
        for (int v = 0; v < n; ++v) add(closed_last(v), Check::csds_vertex, v);
        break;
      case ChainKind::b_edge_cover:
        for (int v = 0; v < n; ++v) {
          if (g.incident_edges(v).empty()) add(-1, Check::cover_lower, v);
          for (int e : g.incident_edges(v)) add(e, Check::cover_lower, v);
        }
        break;
      case ChainKind::b_matching:
      case ChainKind::maximal_b_matching:
        for (int v = 0; v < n; ++v)
          for (int e : g.incident_edges(v)) add(e, Check::cap_upper, v);
        if (p.kind == ChainKind::maximal_b_matching)
          for (int e = 0; e < g.m(); ++e) {
            auto [u, v] = g.edges()[e];
            int last = e;
            for (int f : g.incident_edges(u)) last = std::max(last, f);
            for (int f : g.incident_edges(v)) last = std::max(last, f);
            add(last, Check::mbm_edge, e);
          }
        break;
    }
  }

  int closed_last(int v) const {
    int last = v;
    for (int w : g.neighbors(v)) last = std::max(last, w);
    return last;
  }

  std::vector<std::uint8_t> site_domain(int i) const {
    switch (p.kind) {
      case ChainKind::q_coloring:
      case ChainKind::partial_q_coloring: {
        std::vector<std::uint8_t> d;
        if (p.kind == ChainKind::partial_q_coloring) d.push_back(0);
        for (int c : g.color_list(i, p.q))
          if (c >= 1 && c <= p.q) d.push_back(static_cast<std::uint8_t>(c));
        return d;
      }
      case ChainKind::csds:
        if (g.role(i) == Role::forbidden) return {0};
        return {0, 1};
      default:
        return {0, 1};
    }
  }

  int sel_deg(const State& s, int v) const {
    int d = 0;
    for (int e : g.incident_edges(v)) d += s[e];
    return d;
  }

  bool run(Check c, int a, const State& s, int i) const {
    switch (c) {
      case Check::edge_is: {
        auto [u, v] = g.edges()[a];
        return !(s[u] && s[v]);
      }
      case Check::edge_color: {
        auto [u, v] = g.edges()[a];
        return !(s[u] && s[u] == s[v]);
      }
      case Check::csds_vertex: {
        if (s[a]) return true;
        if (g.role(a) == Role::steiner) return true;
        for (int w : g.neighbors(a))
          if (s[w]) return true;
        return false;
      }
      case Check::mis_vertex: {
        if (s[a]) return true;
        for (int w : g.neighbors(a))
          if (s[w]) return true;
        return false;
      }
      case Check::cover_lower: {
        int have = 0, open = 0;
        for (int e : g.incident_edges(a)) {
          if (e > i) ++open;
          else have += s[e];
        }
        return have + open >= g.b(a);
      }
      case Check::cap_upper:
        return sel_deg(s, a) <= g.b(a);
      case Check::mbm_edge: {
        if (s[a]) return true;
        auto [u, v] = g.edges()[a];
        return !(sel_deg(s, u) < g.b(u) && sel_deg(s, v) < g.b(v));
      }
    }
    return false;
  }

  bool ok_at(const State& s, int i) const {
    for (const auto& c : at[i])
      if (!run(c.kind, c.a, s, i)) return false;
    return true;
  }

  // DFS from depth i; calls emit for every complete state. Returns false to abort.
  template <class F>
  bool dfs(State& s, int i, int stop, const F& emit) const {
    if (i == stop) return emit(s);
    for (auto val : domain[i]) {
      s[i] = val;
      if (ok_at(s, i) && !dfs(s, i + 1, stop, emit)) {
        s[i] = 0;
        return false;
      }
    }
    s[i] = 0;
    return true;
  }
};

[[noreturn]] void cap_error(int cap) {
  throw CapExceeded("state count exceeds cap " + std::to_string(cap));
}

}  // namespace

std::vector<State> enumerate_states_serial(const Graph& g, const ChainParams& p, int cap) {
  check_params(g, p);
  Enumerator en(g, p);
  std::vector<State> out;
  if (en.infeasible) return out;
  State s(en.sites, 0);
  bool ok = en.dfs(s, 0, en.sites, [&](const State& t) {
    if (static_cast<int>(out.size()) >= cap) return false;
    out.push_back(t);
    return true;
  });
  if (!ok) cap_error(cap);
  return out;
}

std::vector<State> enumerate_states(const Graph& g, const ChainParams& p, int cap) {
  check_params(g, p);
  Enumerator en(g, p);
  if (en.infeasible) return {};
  // Split on valid prefixes; each prefix yields a lexicographic block.
  int depth = 0;
  std::vector<State> prefixes{State(en.sites, 0)};
  while (depth < en.sites && prefixes.size() < 256) {
    std::vector<State> next;
    for (auto& s : prefixes)
      for (auto val : en.domain[depth]) {
        s[depth] = val;
        if (en.ok_at(s, depth)) next.push_back(s);
      }
    prefixes = std::move(next);
    ++depth;
  }
  const int k = static_cast<int>(prefixes.size());
  std::vector<std::vector<State>> blocks(k);
  std::atomic<long long> total{0};
  std::atomic<bool> over{false};
#pragma omp parallel for schedule(dynamic, 1)
  for (int b = 0; b < k; ++b) {
    if (over.load(std::memory_order_relaxed)) continue;
    State s = prefixes[b];
    en.dfs(s, depth, en.sites, [&](const State& t) {
      if (total.fetch_add(1, std::memory_order_relaxed) >= cap) {
        over = true;
        return false;
      }
      blocks[b].push_back(t);
      return true;
    });
  }
  if (over) cap_error(cap);
  std::vector<State> out;
  out.reserve(total.load());
  for (auto& blk : blocks)
    for (auto& s : blk) out.push_back(std::move(s));
  return out;
}

// ---- space construction ----

int StateSpace::index_of(const State& s) const {
  auto it = std::lower_bound(states.begin(), states.end(), s);
  if (it == states.end() || *it != s) return -1;
  return static_cast<int>(it - states.begin());
}

double StateSpace::Z() const { return std::exp(log_Z); }

double StateSpace::unnormalized(int i) const { return std::pow(params.lambda, weight_exp[i]); }

double StateSpace::self_loop(int i) const {
  double out = 0;
  for (size_t k = 0; k < adj[i].size(); ++k) out += prob(i, static_cast<int>(k));
  return 1 - out;
}

namespace {

StateSpace assemble(const Graph& g, const ChainParams& p, Normalizer norm, std::vector<State> states,
                    bool parallel) {
  StateSpace sp;
  sp.graph = g;
  sp.params = p;
  sp.norm = norm;
  sp.states = std::move(states);
  const int N = sp.size();
  const bool maximal = is_maximal_chain(p.kind);
  std::vector<std::vector<std::pair<int, double>>> rows(N);
  std::string error;
  auto work = [&](int i) {
    auto moves = maximal ? forward_moves(g, p, sp.states[i]) : enumerate_moves(g, p, sp.states[i]);
    for (const auto& m : moves) {
      const int j = sp.index_of(m.to);
      if (j < 0) throw ChainError("move leaves the state space");
      rows[i].push_back({j, move_rate(p, m.type)});
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < N; ++i) {
      try {
        work(i);
      } catch (const std::exception& e) {
#pragma omp critical
        if (error.empty()) error = e.what();
      }
    }
    if (!error.empty()) throw ChainError(error);
  } else {
    for (int i = 0; i < N; ++i) work(i);
  }
  if (maximal) {
    // symmetrize the forward relation
    std::vector<std::vector<std::pair<int, double>>> sym(N);
    for (int i = 0; i < N; ++i)
      for (auto [j, r] : rows[i]) {
        sym[i].push_back({j, r});
        sym[j].push_back({i, r});
      }
    for (auto& r : sym) {
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end(), [](auto& a, auto& b) { return a.first == b.first; }), r.end());
    }
    rows = std::move(sym);
  }
  sp.adj.resize(N);
  sp.adj_edge.resize(N);
  sp.adj_rate.resize(N);
  for (int i = 0; i < N; ++i) {
    std::sort(rows[i].begin(), rows[i].end());
    for (auto [j, r] : rows[i]) {
      sp.adj[i].push_back(j);
      sp.adj_rate[i].push_back(r);
      if (i < j) sp.edges.push_back({i, j});
    }
    sp.delta_M = std::max(sp.delta_M, static_cast<int>(rows[i].size()));
  }
  std::sort(sp.edges.begin(), sp.edges.end());
  for (int i = 0; i < N; ++i)
    for (int j : sp.adj[i]) {
      auto key = std::make_pair(std::min(i, j), std::max(i, j));
      auto it = std::lower_bound(sp.edges.begin(), sp.edges.end(), key);
      if (it == sp.edges.end() || *it != key) throw ChainError("move relation is not symmetric");
      sp.adj_edge[i].push_back(static_cast<int>(it - sp.edges.begin()));
    }
  for (int i = 0; i < N; ++i)
    for (int j : sp.adj[i])
      if (!std::binary_search(sp.adj[j].begin(), sp.adj[j].end(), i))
        throw ChainError("move relation is not symmetric");
  if (norm == Normalizer::sites && !maximal)
    sp.normalizer = static_cast<double>(std::max(1LL, site_normalizer(g, p)));
  else
    sp.normalizer = std::max(1, sp.delta_M);
  // stationary weights, scaled by the largest term
  sp.weight_exp.resize(N);
  for (int i = 0; i < N; ++i) sp.weight_exp[i] = weight_exponent(p, sp.states[i]);
  if (N > 0) {
    const double ll = std::log(p.lambda);
    double top = -std::numeric_limits<double>::infinity();
    for (int k : sp.weight_exp) top = std::max(top, k * ll);
    double sum = 0, comp = 0;  // Neumaier summation
    for (int k : sp.weight_exp) {
      const double x = std::exp(k * ll - top);
      const double t = sum + x;
      comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
      sum = t;
    }
    sp.log_Z = top + std::log(sum + comp);
    sp.pi.resize(N);
    for (int i = 0; i < N; ++i) sp.pi[i] = std::exp(sp.weight_exp[i] * ll - sp.log_Z);
  }
  return sp;
}

}  // namespace

StateSpace build_state_space(const Graph& g, const ChainParams& p, int cap, Normalizer norm) {
  return assemble(g, p, norm, enumerate_states(g, p, cap), true);
}

StateSpace build_state_space_serial(const Graph& g, const ChainParams& p, int cap, Normalizer norm) {
  return assemble(g, p, norm, enumerate_states_serial(g, p, cap), false);
}

Connectivity check_connectivity(const StateSpace& sp) {
  Connectivity c;
  const int N = sp.size();
  if (N == 0) {
    c.connected = false;
    c.components = 0;
    return c;
  }
  std::vector<int> comp(N, -1);
  int count = 0;
  for (int s = 0; s < N; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> q{s};
    comp[s] = count;
    for (size_t i = 0; i < q.size(); ++i)
      for (int w : sp.adj[q[i]])
        if (comp[w] < 0) {
          comp[w] = count;
          q.push_back(w);
        }
    if (count == 1 && !c.witness) c.witness = std::make_pair(0, s);
    ++count;
  }
  c.components = count;
  c.connected = count == 1;
  return c;
}

Stationary exact_stationary(const StateSpace& sp) {
  if (!check_connectivity(sp).connected) throw std::runtime_error("exact_stationary: disconnected space");
  Stationary st;
  st.pi = sp.pi;
  const int N = sp.size();
  std::vector<double> next(N, 0);
  for (int i = 0; i < N; ++i) {
    const double loop = sp.self_loop(i);
    st.min_self_loop = std::min(st.min_self_loop, loop);
    double row = loop;
    next[i] += st.pi[i] * loop;
    for (size_t k = 0; k < sp.adj[i].size(); ++k) {
      const int j = sp.adj[i][k];
      const double pij = sp.prob(i, static_cast<int>(k));
      row += pij;
      next[j] += st.pi[i] * pij;
      // P(j, i) from j's row
      const auto& aj = sp.adj[j];
      const int back = static_cast<int>(std::lower_bound(aj.begin(), aj.end(), i) - aj.begin());
      const double pji = sp.prob(j, back);
      st.detailed_balance_residual =
          std::max(st.detailed_balance_residual, std::abs(st.pi[i] * pij - st.pi[j] * pji));
    }
    st.row_sum_residual = std::max(st.row_sum_residual, std::abs(row - 1));
  }
  for (int i = 0; i < N; ++i) st.fixed_point_residual = std::max(st.fixed_point_residual, std::abs(next[i] - st.pi[i]));
  return st;
}

double Rational::value() const {
  if (den == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(num) / static_cast<double>(den);
}

Rational exact_expansion(const std::vector<std::vector<int>>& adj, int limit) {
  const int N = static_cast<int>(adj.size());
  if (N > limit) throw CapExceeded("exact_expansion: " + std::to_string(N) + " vertices exceed limit");
  Rational best{0, 0};
  if (N < 2) return best;
  std::vector<char> in(N, 0);
  long long cut = 0;
  int size = 0;
  const std::uint64_t total = 1ull << N;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int v = std::countr_zero(k);
    int inside = 0;
    for (int w : adj[v]) inside += in[w];
    const int outside = static_cast<int>(adj[v].size()) - inside;
    if (in[v]) {
      in[v] = 0;
      --size;
      cut += inside - outside;
    } else {
      in[v] = 1;
      ++size;
      cut += outside - inside;
    }
    if (2 * size > N) continue;
    if (best.den == 0 || cut * best.den < best.num * size) best = {cut, size};
  }
  const long long g = std::gcd(best.num, best.den);
  if (g > 0) best = {best.num / g, best.den / g};
  return best;
}

Rational exact_expansion(const StateSpace& sp, int limit) { return exact_expansion(sp.adj, limit); }

double exact_conductance(const StateSpace& sp, int limit) {
  const int N = sp.size();
  if (N > limit) throw CapExceeded("exact_conductance: " + std::to_string(N) + " states exceed limit");
  double best = std::numeric_limits<double>::infinity();
  if (N < 2) return best;
  std::vector<char> in(N, 0);
  long double cut = 0, mass = 0;
  const std::uint64_t total = 1ull << N;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int v = std::countr_zero(k);
    long double inside = 0, outside = 0;
    for (size_t j = 0; j < sp.adj[v].size(); ++j) {
      const long double q = static_cast<long double>(sp.pi[v]) * sp.prob(v, static_cast<int>(j));
      (in[sp.adj[v][j]] ? inside : outside) += q;
    }
    if (in[v]) {
      in[v] = 0;
      mass -= sp.pi[v];
      cut += inside - outside;
    } else {
      in[v] = 1;
      mass += sp.pi[v];
      cut += outside - inside;
    }
    if (mass <= 0 || mass > 0.5L + 1e-15L) continue;
    best = std::min(best, static_cast<double>(cut / mass));
  }
  return best;
}

namespace {

void step(const StateSpace& sp, const std::vector<double>& cur, std::vector<double>& next) {
  std::fill(next.begin(), next.end(), 0.0);
  for (int i = 0; i < sp.size(); ++i) {
    const double x = cur[i];
    if (x == 0) continue;
    next[i] += x * sp.self_loop(i);
    for (size_t k = 0; k < sp.adj[i].size(); ++k) next[sp.adj[i][k]] += x * sp.prob(i, static_cast<int>(k));
  }
}

double tv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

// Precomputed CSR including the self loop for the lockstep kernel.
struct Csr {
  std::vector<int> start, col;
  std::vector<double> val;
  explicit Csr(const StateSpace& sp) {
    start.push_back(0);
    for (int i = 0; i < sp.size(); ++i) {
      col.push_back(i);
      val.push_back(sp.self_loop(i));
      for (size_t k = 0; k < sp.adj[i].size(); ++k) {
        col.push_back(sp.adj[i][k]);
        val.push_back(sp.prob(i, static_cast<int>(k)));
      }
      start.push_back(static_cast<int>(col.size()));
    }
  }
  void apply(const std::vector<double>& cur, std::vector<double>& next) const {
    std::fill(next.begin(), next.end(), 0.0);
    const int n = static_cast<int>(start.size()) - 1;
    for (int i = 0; i < n; ++i) {
      const double x = cur[i];
      if (x == 0) continue;
      for (int k = start[i]; k < start[i + 1]; ++k) next[col[k]] += x * val[k];
    }
  }
};

int mixing_impl(const StateSpace& sp, double epsilon, int state_limit, int t_limit, bool parallel) {
  const int N = sp.size();
  if (N > state_limit) throw CapExceeded("exact_mixing_time: " + std::to_string(N) + " states exceed limit");
  if (N == 0) throw std::runtime_error("exact_mixing_time: empty space");
  const Csr csr(sp);
  // Starts still above epsilon; TV from a fixed start never increases.
  std::vector<int> active;
  std::vector<std::vector<double>> dist;
  for (int s = 0; s < N; ++s)
    if (1 - sp.pi[s] >= epsilon) {
      active.push_back(s);
      std::vector<double> d(N, 0.0);
      d[s] = 1;
      dist.push_back(std::move(d));
    }
  int t = 0;
  while (!active.empty()) {
    if (t >= t_limit) throw std::runtime_error("exact_mixing_time: t_limit reached");
    ++t;
    const int k = static_cast<int>(active.size());
    std::vector<char> done(k, 0);
    auto body = [&](int a) {
      std::vector<double> next(N);
      csr.apply(dist[a], next);
      dist[a].swap(next);
      done[a] = tv(dist[a], sp.pi) < epsilon;
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
      for (int a = 0; a < k; ++a) body(a);
    } else {
      for (int a = 0; a < k; ++a) body(a);
    }
    std::vector<int> na;
    std::vector<std::vector<double>> nd;
    for (int a = 0; a < k; ++a)
      if (!done[a]) {
        na.push_back(active[a]);
        nd.push_back(std::move(dist[a]));
      }
    active.swap(na);
    dist.swap(nd);
  }
  return t;
}

}  // namespace

std::vector<double> distribution_evolution(const StateSpace& sp, int start, int t_max) {
  if (start < 0 || start >= sp.size()) throw std::out_of_range("distribution_evolution: bad start");
  std::vector<double> cur(sp.size(), 0.0), next(sp.size());
  cur[start] = 1;
  std::vector<double> out{tv(cur, sp.pi)};
  for (int t = 1; t <= t_max; ++t) {
    step(sp, cur, next);
    cur.swap(next);
    out.push_back(tv(cur, sp.pi));
  }
  return out;
}

int exact_mixing_time(const StateSpace& sp, double epsilon, int state_limit, int t_limit) {
  return mixing_impl(sp, epsilon, state_limit, t_limit, true);
}

int exact_mixing_time_serial(const StateSpace& sp, double epsilon, int state_limit, int t_limit) {
  return mixing_impl(sp, epsilon, state_limit, t_limit, false);
}

std::string state_hex(const State& s) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (auto x : s) {
    out.push_back(digits[x >> 4]);
    out.push_back(digits[x & 15]);
  }
  return out;
}

std::string dump_state_space(const StateSpace& sp) {
  nlohmann::ordered_json j;
  j["format"] = "gd-state-space/1";
  j["chain"] = chain_name(sp.params.kind);
  j["lambda"] = sp.params.lambda;
  j["q"] = sp.params.q;
  j["normalizer"] = sp.norm == Normalizer::sites ? "sites" : "delta_M";
  j["sites"] = num_sites(sp.graph, sp.params);
  j["delta_M"] = sp.delta_M;
  j["log_Z"] = sp.log_Z;
  auto& st = j["states"] = nlohmann::ordered_json::array();
  for (const auto& s : sp.states) st.push_back(state_hex(s));
  auto& ed = j["edges"] = nlohmann::ordered_json::array();
  for (auto [a, b] : sp.edges) ed.push_back({a, b});
  auto& w = j["weights"] = nlohmann::ordered_json::array();
  for (int k : sp.weight_exp) w.push_back(std::pow(sp.params.lambda, k));
  return j.dump(1) + "\n";
}

StateSpace load_state_space(const std::string& text, const Graph& g) {
  auto j = nlohmann::json::parse(text);
  ChainParams p;
  p.kind = parse_chain(j.at("chain").get<std::string>());
  p.lambda = j.at("lambda").get<double>();
  p.q = j.at("q").get<int>();
  const Normalizer norm = j.at("normalizer").get<std::string>() == "sites" ? Normalizer::sites : Normalizer::delta_M;
  const auto& st = j.at("states");
  StateSpace sp = build_state_space(g, p, static_cast<int>(st.size()) + 1, norm);
  if (st.size() != sp.states.size()) throw std::runtime_error("state-space dump: state count mismatch");
  for (size_t i = 0; i < st.size(); ++i)
    if (st[i].get<std::string>() != state_hex(sp.states[i]))
      throw std::runtime_error("state-space dump: state " + std::to_string(i) + " mismatch");
  const auto& ed = j.at("edges");
  if (ed.size() != sp.edges.size()) throw std::runtime_error("state-space dump: edge count mismatch");
  for (size_t i = 0; i < ed.size(); ++i)
    if (ed[i][0].get<int>() != sp.edges[i].first || ed[i][1].get<int>() != sp.edges[i].second)
      throw std::runtime_error("state-space dump: edge " + std::to_string(i) + " mismatch");
  return sp;
}

}  // namespace gd
