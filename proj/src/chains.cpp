#include "gd/chains.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gd {

const char* chain_name(ChainKind k) {
  switch (k) {
    case ChainKind::independent_set: return "independent_set";
    case ChainKind::q_coloring: return "q_coloring";
    case ChainKind::partial_q_coloring: return "partial_q_coloring";
    case ChainKind::b_edge_cover: return "b_edge_cover";
    case ChainKind::b_matching: return "b_matching";
    case ChainKind::csds: return "csds";
    case ChainKind::maximal_independent_set: return "maximal_independent_set";
    case ChainKind::maximal_b_matching: return "maximal_b_matching";
  }
  return "?";
}

ChainKind parse_chain(const std::string& s) {
  for (ChainKind k : kAllChains)
    if (s == chain_name(k)) return k;
  if (s == "hardcore" || s == "is") return ChainKind::independent_set;
  if (s == "dominating_set") return ChainKind::csds;
  throw std::invalid_argument("unknown chain kind '" + s + "'");
}

bool is_edge_chain(ChainKind k) {
  return k == ChainKind::b_edge_cover || k == ChainKind::b_matching || k == ChainKind::maximal_b_matching;
}
bool is_coloring_chain(ChainKind k) {
  return k == ChainKind::q_coloring || k == ChainKind::partial_q_coloring;
}
bool is_maximal_chain(ChainKind k) {
  return k == ChainKind::maximal_independent_set || k == ChainKind::maximal_b_matching;
}
bool is_uniform_chain(ChainKind k) { return k == ChainKind::q_coloring || is_maximal_chain(k); }

int num_sites(const Graph& g, const ChainParams& p) { return is_edge_chain(p.kind) ? g.m() : g.n(); }

void check_params(const Graph& g, const ChainParams& p) {
  if (!(p.lambda > 0) || !std::isfinite(p.lambda)) throw ChainError("lambda must be positive");
  if (p.q < 1 || p.q > 254) throw ChainError("q must lie in [1, 254]");
  if (is_coloring_chain(p.kind) && g.color_lists())
    for (const auto& l : *g.color_lists())
      for (int c : l)
        if (c > p.q) throw ChainError("color list entry " + std::to_string(c) + " outside [q]");
}

namespace {

bool in_list(const Graph& g, int v, int c, int q) {
  if (c < 1 || c > q) return false;
  if (!g.color_lists()) return true;
  const auto& l = (*g.color_lists())[v];
  return l.empty() || std::binary_search(l.begin(), l.end(), c);
}

int sel_degree(const Graph& g, const State& s, int v) {
  int d = 0;
  for (int e : g.incident_edges(v)) d += s[e];
  return d;
}

bool has_selected_neighbor(const Graph& g, const State& s, int v) {
  for (int w : g.neighbors(v))
    if (s[w]) return true;
  return false;
}

bool neighbor_has_color(const Graph& g, const State& s, int v, int c) {
  for (int w : g.neighbors(v))
    if (s[w] == c) return true;
  return false;
}

bool csds_ok_at(const Graph& g, const State& s, int v) {
  if (s[v]) return g.role(v) != Role::forbidden;
  return g.role(v) == Role::steiner || has_selected_neighbor(g, s, v);
}

bool is_mis(const Graph& g, const State& s) {
  for (int v = 0; v < g.n(); ++v) {
    if (s[v] > 1) return false;
    const bool nb = has_selected_neighbor(g, s, v);
    if (s[v] ? nb : !nb) return false;
  }
  return true;
}

bool is_bmatching(const Graph& g, const State& s) {
  for (auto x : s)
    if (x > 1) return false;
  for (int v = 0; v < g.n(); ++v)
    if (sel_degree(g, s, v) > g.b(v)) return false;
  return true;
}

bool is_maximal_bmatching(const Graph& g, const State& s) {
  if (!is_bmatching(g, s)) return false;
  for (int e = 0; e < g.m(); ++e) {
    if (s[e]) continue;
    auto [u, v] = g.edges()[e];
    if (sel_degree(g, s, u) < g.b(u) && sel_degree(g, s, v) < g.b(v)) return false;
  }
  return true;
}

}  // namespace

bool is_valid_state(const Graph& g, const ChainParams& p, const State& s) {
  if (static_cast<int>(s.size()) != num_sites(g, p)) return false;
  switch (p.kind) {
    case ChainKind::independent_set:
      for (auto x : s)
        if (x > 1) return false;
      for (auto [u, v] : g.edges())
        if (s[u] && s[v]) return false;
      return true;
    case ChainKind::q_coloring:
    case ChainKind::partial_q_coloring:
      for (int v = 0; v < g.n(); ++v) {
        if (s[v] == 0) {
          if (p.kind == ChainKind::q_coloring) return false;
          continue;
        }
        if (!in_list(g, v, s[v], p.q)) return false;
      }
      for (auto [u, v] : g.edges())
        if (s[u] && s[u] == s[v]) return false;
      return true;
    case ChainKind::b_edge_cover:
      for (auto x : s)
        if (x > 1) return false;
      for (int v = 0; v < g.n(); ++v)
        if (sel_degree(g, s, v) < g.b(v)) return false;
      return true;
    case ChainKind::b_matching:
      return is_bmatching(g, s);
    case ChainKind::csds:
      for (int v = 0; v < g.n(); ++v)
        if (s[v] > 1 || !csds_ok_at(g, s, v)) return false;
      return true;
    case ChainKind::maximal_independent_set:
      return is_mis(g, s);
    case ChainKind::maximal_b_matching:
      return is_maximal_bmatching(g, s);
  }
  return false;
}

long long site_normalizer(const Graph& g, const ChainParams& p) {
  switch (p.kind) {
    case ChainKind::independent_set:
    case ChainKind::csds:
      return g.n();
    case ChainKind::b_edge_cover:
    case ChainKind::b_matching:
      return g.m();
    case ChainKind::partial_q_coloring:
      return static_cast<long long>(g.n()) * (p.q + 1);
    case ChainKind::q_coloring:
      return static_cast<long long>(g.n()) * std::max(1, p.q - 1);
    default:
      throw ChainError(std::string(chain_name(p.kind)) + " has no site normalizer");
  }
}

std::optional<SiteMove> propose_site(const Graph& g, const ChainParams& p, const State& s, long long site) {
  switch (p.kind) {
    case ChainKind::independent_set: {
      const int v = static_cast<int>(site);
      if (s[v]) return SiteMove{v, 0, MoveType::drop};
      if (has_selected_neighbor(g, s, v)) return std::nullopt;
      return SiteMove{v, 1, MoveType::add};
    }
    case ChainKind::csds: {
      const int v = static_cast<int>(site);
      if (!s[v]) {
        if (g.role(v) == Role::forbidden) return std::nullopt;
        return SiteMove{v, 1, MoveType::add};
      }
      if (g.role(v) != Role::steiner && !has_selected_neighbor(g, s, v)) return std::nullopt;
      for (int w : g.neighbors(v)) {
        if (s[w] || g.role(w) == Role::steiner) continue;
        bool other = false;
        for (int x : g.neighbors(w))
          if (x != v && s[x]) {
            other = true;
            break;
          }
        if (!other) return std::nullopt;
      }
      return SiteMove{v, 0, MoveType::drop};
    }
    case ChainKind::b_matching: {
      const int e = static_cast<int>(site);
      if (s[e]) return SiteMove{e, 0, MoveType::drop};
      auto [u, v] = g.edges()[e];
      if (sel_degree(g, s, u) < g.b(u) && sel_degree(g, s, v) < g.b(v)) return SiteMove{e, 1, MoveType::add};
      return std::nullopt;
    }
    case ChainKind::b_edge_cover: {
      const int e = static_cast<int>(site);
      if (!s[e]) return SiteMove{e, 1, MoveType::add};
      auto [u, v] = g.edges()[e];
      if (sel_degree(g, s, u) > g.b(u) && sel_degree(g, s, v) > g.b(v)) return SiteMove{e, 0, MoveType::drop};
      return std::nullopt;
    }
    case ChainKind::partial_q_coloring: {
      const int v = static_cast<int>(site / (p.q + 1));
      const int j = static_cast<int>(site % (p.q + 1));
      if (j == p.q) {
        if (s[v]) return SiteMove{v, 0, MoveType::drop};
        return std::nullopt;
      }
      const int c = j + 1;
      if (s[v] == c || !in_list(g, v, c, p.q) || neighbor_has_color(g, s, v, c)) return std::nullopt;
      return SiteMove{v, static_cast<std::uint8_t>(c), s[v] ? MoveType::recolor : MoveType::add};
    }
    case ChainKind::q_coloring: {
      if (p.q < 2) return std::nullopt;
      const int v = static_cast<int>(site / (p.q - 1));
      int c = static_cast<int>(site % (p.q - 1)) + 1;
      if (c >= s[v]) ++c;
      if (!in_list(g, v, c, p.q) || neighbor_has_color(g, s, v, c)) return std::nullopt;
      return SiteMove{v, static_cast<std::uint8_t>(c), MoveType::recolor};
    }
    default:
      throw ChainError("propose_site: maximal chains have no site proposals");
  }
}

namespace {

// ---- maximal independent sets ----

std::vector<int> distance_two(const Graph& g, int v) {
  std::vector<char> mark(g.n(), 0);
  mark[v] = 1;
  for (int w : g.neighbors(v)) mark[w] = 1;
  std::vector<int> out;
  for (int w : g.neighbors(v))
    for (int x : g.neighbors(w))
      if (!mark[x]) {
        mark[x] = 1;
        out.push_back(x);
      }
  std::sort(out.begin(), out.end());
  return out;
}

// Every independent W inside `pool` (all unselected, none adjacent to s) that
// dominates the pool; each completion is appended to out.
void complete_mis(const Graph& g, State& s, const std::vector<int>& pool, size_t i, std::vector<State>& out) {
  if (i == pool.size()) {
    for (int u : pool)
      if (!s[u] && !has_selected_neighbor(g, s, u)) return;
    out.push_back(s);
    return;
  }
  const int u = pool[i];
  // Prune: an earlier pool vertex whose pool neighbors are all decided must be covered.
  complete_mis(g, s, pool, i + 1, out);
  if (!has_selected_neighbor(g, s, u)) {
    s[u] = 1;
    complete_mis(g, s, pool, i + 1, out);
    s[u] = 0;
  }
}

std::vector<State> mis_forward(const Graph& g, const State& s) {
  std::vector<State> out;
  for (int v = 0; v < g.n(); ++v) {
    if (s[v]) continue;
    State t = s;
    for (int w : g.neighbors(v)) t[w] = 0;
    t[v] = 1;
    std::vector<int> pool;
    for (int u = 0; u < g.n(); ++u)
      if (!t[u] && !has_selected_neighbor(g, t, u)) pool.push_back(u);
    if (static_cast<int>(pool.size()) > kMaximalEnumLimit)
      throw ChainError("maximal_independent_set: undominated set exceeds exhaustive limit");
    complete_mis(g, t, pool, 0, out);
  }
  return out;
}

// s2 reaches s by a forward move adding v.
bool mis_forward_reaches(const Graph& g, const State& s2, int v, const State& s) {
  if (s2[v]) return false;
  State base = s2;
  for (int w : g.neighbors(v)) base[w] = 0;
  base[v] = 1;
  for (int u = 0; u < g.n(); ++u) {
    if (base[u] && !s[u]) return false;
    if (s[u] && !base[u]) {
      // u must have been undominated after the base step
      if (has_selected_neighbor(g, base, u)) return false;
    }
  }
  return true;
}

std::vector<State> mis_reverse(const Graph& g, const State& s) {
  std::vector<State> out;
  for (int v = 0; v < g.n(); ++v) {
    if (!s[v]) continue;
    std::vector<int> r_pool;
    for (int x : distance_two(g, v))
      if (s[x]) r_pool.push_back(x);
    const auto& nb = g.neighbors(v);
    if (static_cast<int>(r_pool.size() + nb.size()) > kMaximalEnumLimit)
      throw ChainError("maximal_independent_set: reverse-move neighborhood exceeds exhaustive limit");
    for (std::uint64_t rm = 0; rm < (1ull << r_pool.size()); ++rm)
      for (std::uint64_t ym = 1; ym < (1ull << nb.size()); ++ym) {
        State t = s;
        t[v] = 0;
        for (size_t i = 0; i < r_pool.size(); ++i)
          if (rm >> i & 1) t[r_pool[i]] = 0;
        for (size_t i = 0; i < nb.size(); ++i)
          if (ym >> i & 1) t[nb[i]] = 1;
        if (is_mis(g, t) && mis_forward_reaches(g, t, v, s)) out.push_back(std::move(t));
      }
  }
  return out;
}

// ---- maximal b-matchings ----

void for_each_subset_of_size(const std::vector<int>& items, int k, std::vector<int>& cur, size_t i,
                             const auto& fn) {
  if (static_cast<int>(cur.size()) == k) {
    fn(cur);
    return;
  }
  if (i == items.size() || static_cast<int>(cur.size() + items.size() - i) < k) return;
  cur.push_back(items[i]);
  for_each_subset_of_size(items, k, cur, i + 1, fn);
  cur.pop_back();
  for_each_subset_of_size(items, k, cur, i + 1, fn);
}

void complete_mbm(const Graph& g, State& s, std::vector<int>& deg, const std::vector<int>& pool, size_t i,
                  std::vector<State>& out) {
  if (i == pool.size()) {
    if (is_maximal_bmatching(g, s)) out.push_back(s);
    return;
  }
  complete_mbm(g, s, deg, pool, i + 1, out);
  const int f = pool[i];
  auto [a, b] = g.edges()[f];
  if (deg[a] < g.b(a) && deg[b] < g.b(b)) {
    s[f] = 1;
    ++deg[a], ++deg[b];
    complete_mbm(g, s, deg, pool, i + 1, out);
    s[f] = 0;
    --deg[a], --deg[b];
  }
}

std::vector<int> edges_near(const Graph& g, int u, int v) {
  std::set<int> es;
  for (int x : {u, v})
    for (int w : g.neighbors(x))
      for (int f : g.incident_edges(w)) es.insert(f);
  return {es.begin(), es.end()};
}

int removal_need(const Graph& g, const State& s, int x) {
  return std::max(0, sel_degree(g, s, x) + 1 - g.b(x));
}

std::vector<State> mbm_forward(const Graph& g, const State& s) {
  std::vector<State> out;
  for (int e = 0; e < g.m(); ++e) {
    if (s[e]) continue;
    auto [u, v] = g.edges()[e];
    const int nu = removal_need(g, s, u), nv = removal_need(g, s, v);
    std::vector<int> inc_u, inc_v;
    for (int f : g.incident_edges(u))
      if (s[f]) inc_u.push_back(f);
    for (int f : g.incident_edges(v))
      if (s[f]) inc_v.push_back(f);
    if (nu > static_cast<int>(inc_u.size()) || nv > static_cast<int>(inc_v.size())) continue;
    const auto near = edges_near(g, u, v);
    std::vector<int> cu, cv;
    for_each_subset_of_size(inc_u, nu, cu, 0, [&](const std::vector<int>& ru) {
      for_each_subset_of_size(inc_v, nv, cv, 0, [&](const std::vector<int>& rv) {
        State t = s;
        for (int f : ru) t[f] = 0;
        for (int f : rv) t[f] = 0;
        t[e] = 1;
        std::vector<int> pool;
        for (int f : near)
          if (!t[f]) pool.push_back(f);
        if (static_cast<int>(pool.size()) > kMaximalEnumLimit)
          throw ChainError("maximal_b_matching: completion pool exceeds exhaustive limit");
        std::vector<int> deg(g.n());
        for (int x = 0; x < g.n(); ++x) deg[x] = sel_degree(g, t, x);
        complete_mbm(g, t, deg, pool, 0, out);
      });
    });
  }
  return out;
}

std::vector<State> mbm_reverse(const Graph& g, const State& s) {
  std::vector<State> out;
  for (int e = 0; e < g.m(); ++e) {
    if (!s[e]) continue;
    auto [u, v] = g.edges()[e];
    std::vector<int> add_back;  // edges of s the forward move may have added
    for (int f : edges_near(g, u, v))
      if (s[f] && f != e) add_back.push_back(f);
    std::vector<int> restore;  // edges at u or v the forward move may have removed
    for (int x : {u, v})
      for (int f : g.incident_edges(x))
        if (!s[f] && f != e) restore.push_back(f);
    if (static_cast<int>(add_back.size() + restore.size()) > kMaximalEnumLimit)
      throw ChainError("maximal_b_matching: reverse-move neighborhood exceeds exhaustive limit");
    for (std::uint64_t am = 0; am < (1ull << add_back.size()); ++am) {
      State t = s;
      t[e] = 0;
      for (size_t i = 0; i < add_back.size(); ++i)
        if (am >> i & 1) t[add_back[i]] = 0;
      std::vector<int> deg(g.n());
      for (int x = 0; x < g.n(); ++x) deg[x] = sel_degree(g, t, x);
      // choose the restored edges with capacity pruning
      std::vector<int> chosen;
      auto rec = [&](auto&& self, size_t i) -> void {
        if (i == restore.size()) {
          if (!is_maximal_bmatching(g, t)) return;
          int ru = 0, rv = 0;
          for (int f : chosen) {
            auto [a, b] = g.edges()[f];
            if (a == u || b == u) ++ru;
            if (a == v || b == v) ++rv;
          }
          if (ru == removal_need(g, t, u) && rv == removal_need(g, t, v)) out.push_back(t);
          return;
        }
        self(self, i + 1);
        const int f = restore[i];
        auto [a, b] = g.edges()[f];
        if (deg[a] < g.b(a) && deg[b] < g.b(b)) {
          t[f] = 1;
          ++deg[a], ++deg[b];
          chosen.push_back(f);
          self(self, i + 1);
          chosen.pop_back();
          t[f] = 0;
          --deg[a], --deg[b];
        }
      };
      rec(rec, 0);
    }
  }
  return out;
}

std::vector<Move> to_moves(std::vector<State> states, const State& self) {
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  std::vector<Move> out;
  for (auto& t : states)
    if (t != self) out.push_back({std::move(t), MoveType::jump});
  return out;
}

std::vector<Move> site_moves(const Graph& g, const ChainParams& p, const State& s) {
  std::vector<Move> out;
  const long long k = site_normalizer(g, p);
  for (long long site = 0; site < k; ++site)
    if (auto m = propose_site(g, p, s, site)) {
      State t = s;
      t[m->index] = m->value;
      out.push_back({std::move(t), m->type});
    }
  std::sort(out.begin(), out.end(), [](const Move& a, const Move& b) { return a.to < b.to; });
  return out;
}

}  // namespace

std::vector<Move> forward_moves(const Graph& g, const ChainParams& p, const State& s) {
  if (!is_valid_state(g, p, s)) throw ChainError("enumerate_moves: invalid state");
  if (p.kind == ChainKind::maximal_independent_set) return to_moves(mis_forward(g, s), s);
  if (p.kind == ChainKind::maximal_b_matching) return to_moves(mbm_forward(g, s), s);
  return site_moves(g, p, s);
}

std::vector<Move> enumerate_moves(const Graph& g, const ChainParams& p, const State& s) {
  if (!is_maximal_chain(p.kind)) return forward_moves(g, p, s);
  if (!is_valid_state(g, p, s)) throw ChainError("enumerate_moves: invalid state");
  std::vector<State> all;
  if (p.kind == ChainKind::maximal_independent_set) {
    all = mis_forward(g, s);
    auto r = mis_reverse(g, s);
    all.insert(all.end(), r.begin(), r.end());
  } else {
    all = mbm_forward(g, s);
    auto r = mbm_reverse(g, s);
    all.insert(all.end(), r.begin(), r.end());
  }
  return to_moves(std::move(all), s);
}

double move_rate(const ChainParams& p, MoveType t) {
  switch (t) {
    case MoveType::add: return p.lambda / (p.lambda + 1);
    case MoveType::drop: return 1 / (p.lambda + 1);
    case MoveType::recolor: return p.kind == ChainKind::q_coloring ? 0.5 : p.lambda / (p.lambda + 1);
    case MoveType::jump: return 0.5;
  }
  return 0;
}

int weight_exponent(const ChainParams& p, const State& s) {
  if (is_uniform_chain(p.kind)) return 0;
  int k = 0;
  for (auto x : s) k += x != 0;
  return k;
}

double unnormalized_weight(const ChainParams& p, const State& s) {
  return std::pow(p.lambda, weight_exponent(p, s));
}

double transition_probability(const Graph& g, const ChainParams& p, const State& s, const State& s2,
                              double delta_M) {
  const auto moves = enumerate_moves(g, p, s);
  if (s == s2) {
    double out = 0;
    for (const auto& m : moves) out += move_rate(p, m.type) / delta_M;
    return 1 - out;
  }
  for (const auto& m : moves)
    if (m.to == s2) return move_rate(p, m.type) / delta_M;
  throw ChainError("transition_probability: states are not adjacent");
}

State initial_state(const Graph& g, const ChainParams& p) {
  State s(num_sites(g, p), 0);
  switch (p.kind) {
    case ChainKind::independent_set:
    case ChainKind::b_matching:
    case ChainKind::partial_q_coloring:
      break;
    case ChainKind::b_edge_cover:
      std::fill(s.begin(), s.end(), 1);
      break;
    case ChainKind::csds:
      for (int v = 0; v < g.n(); ++v) s[v] = g.role(v) != Role::forbidden;
      break;
    case ChainKind::maximal_independent_set:
      for (int v = 0; v < g.n(); ++v)
        if (!has_selected_neighbor(g, s, v)) s[v] = 1;
      break;
    case ChainKind::maximal_b_matching: {
      std::vector<int> deg(g.n(), 0);
      for (int e = 0; e < g.m(); ++e) {
        auto [u, v] = g.edges()[e];
        if (deg[u] < g.b(u) && deg[v] < g.b(v)) {
          s[e] = 1;
          ++deg[u], ++deg[v];
        }
      }
      break;
    }
    case ChainKind::q_coloring:
      for (int v = 0; v < g.n(); ++v) {
        for (int c : g.color_list(v, p.q))
          if (c <= p.q && !neighbor_has_color(g, s, v, c)) {
            s[v] = static_cast<std::uint8_t>(c);
            break;
          }
        if (!s[v]) throw ChainError("greedy list coloring failed at vertex " + std::to_string(v));
      }
      break;
  }
  if (!is_valid_state(g, p, s)) throw ChainError("no valid start state for " + std::string(chain_name(p.kind)));
  return s;
}

double analytic_delta_bound(const Graph& g, const ChainParams& p) {
  const double d = g.max_degree();
  switch (p.kind) {
    case ChainKind::independent_set:
    case ChainKind::csds:
      return std::max(1, g.n());
    case ChainKind::b_edge_cover:
    case ChainKind::b_matching:
      return std::max(1, g.m());
    case ChainKind::partial_q_coloring:
      return std::max(1, g.n() * p.q);
    case ChainKind::q_coloring:
      return std::max(1, g.n() * std::max(1, p.q - 1));
    case ChainKind::maximal_independent_set:
      return std::max(1.0, g.n() * std::pow(2.0, d * d + d));
    case ChainKind::maximal_b_matching:
      // forward and reverse moves: edge choice, removals at two ends, completions
      return std::max(1.0, 2.0 * g.m() * std::pow(2.0, 2 * d + 2 * d * d));
  }
  return 1;
}

}  // namespace gd
