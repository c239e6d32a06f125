#include "gd/partition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gd {

std::vector<int> trace_sites(const Graph& g, ChainKind kind, const std::vector<int>& X) {
  std::vector<char> in(g.n(), 0);
  for (int x : X) in[x] = 1;
  std::vector<int> out;
  if (!is_edge_chain(kind)) {
    out = X;
  } else {
    for (int e = 0; e < g.m(); ++e) {
      auto [u, v] = g.edges()[e];
      const bool inside = kind == ChainKind::b_edge_cover ? (in[u] && in[v]) : (in[u] || in[v]);
      if (inside) out.push_back(e);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<int>& ClassPartition::between(int a, int b) const {
  static const std::vector<int> none;
  auto it = boundary.find({std::min(a, b), std::max(a, b)});
  return it == boundary.end() ? none : it->second;
}

std::string ClassPartition::label(int c) const {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < trace_sites.size(); ++i) os << (i ? "," : "") << trace_sites[i] << '=' << int(traces[c][i]);
  os << ']';
  return os.str();
}

ClassPartition partition_by_trace(const StateSpace& sp, const Separator& sep) {
  const Graph& g = sp.graph;
  std::vector<int> side(g.n(), -1);
  auto mark = [&](const std::vector<int>& vs, int id) {
    for (int v : vs) {
      if (v < 0 || v >= g.n() || side[v] >= 0) throw std::invalid_argument("X, A, B do not partition V");
      side[v] = id;
    }
  };
  mark(sep.X, 0);
  mark(sep.A, 1);
  mark(sep.B, 2);
  for (int v = 0; v < g.n(); ++v)
    if (side[v] < 0) throw std::invalid_argument("X, A, B do not cover V");
  for (auto [u, v] : g.edges())
    if (side[u] + side[v] == 3) throw std::invalid_argument("X is not a separator: edge joins A and B");
  ClassPartition part;
  part.sep = sep;
  part.trace_sites = trace_sites(g, sp.params.kind, sep.X);
  const int N = sp.size();
  std::vector<State> keys(N);
  for (int i = 0; i < N; ++i)
    for (int t : part.trace_sites) keys[i].push_back(sp.states[i][t]);
  part.traces = keys;
  std::sort(part.traces.begin(), part.traces.end());
  part.traces.erase(std::unique(part.traces.begin(), part.traces.end()), part.traces.end());
  const int K = part.size();
  part.members.assign(K, {});
  part.intra.assign(K, {});
  part.class_adj.assign(K, {});
  part.class_of.resize(N);
  for (int i = 0; i < N; ++i) {
    part.class_of[i] =
        static_cast<int>(std::lower_bound(part.traces.begin(), part.traces.end(), keys[i]) - part.traces.begin());
    part.members[part.class_of[i]].push_back(i);
  }
  for (int e = 0; e < static_cast<int>(sp.edges.size()); ++e) {
    auto [i, j] = sp.edges[e];
    const int a = part.class_of[i], b = part.class_of[j];
    if (a == b) part.intra[a].push_back(e);
    else part.boundary[{std::min(a, b), std::max(a, b)}].push_back(e);
  }
  for (const auto& [key, es] : part.boundary) {
    part.class_adj[key.first].push_back(key.second);
    part.class_adj[key.second].push_back(key.first);
  }
  for (auto& a : part.class_adj) std::sort(a.begin(), a.end());
  return part;
}

ClassPartition partition_by_trace(const StateSpace& sp, const std::vector<int>& X) {
  return partition_by_trace(sp, separator_from(sp.graph, X));
}

bool needs_subclasses(ChainKind k) {
  return k == ChainKind::b_edge_cover || k == ChainKind::csds || is_maximal_chain(k);
}

bool hierarchical_kind(ChainKind k) {
  return k == ChainKind::independent_set || k == ChainKind::partial_q_coloring || k == ChainKind::csds ||
         k == ChainKind::b_edge_cover || k == ChainKind::b_matching;
}

// ---- certificates ----

ProductCertificate certify_with_factors(const StateSpace& sp, std::vector<int> members, FactorSpec a, FactorSpec b,
                                        std::vector<std::pair<int, std::uint8_t>> fixed, std::string label) {
  ProductCertificate c;
  c.label = std::move(label);
  std::sort(members.begin(), members.end());
  c.members = std::move(members);
  c.spec_a = std::move(a);
  c.spec_b = std::move(b);
  c.fixed = std::move(fixed);
  c.space_a = build_state_space_serial(c.spec_a.graph, c.spec_a.params);
  c.space_b = build_state_space_serial(c.spec_b.graph, c.spec_b.params);
  const int sites = num_sites(sp.graph, sp.params);
  std::vector<int> cover(sites, 0);
  for (auto [s, v] : c.fixed) ++cover[s];
  for (int s : c.spec_a.site_map)
    if (s >= 0) ++cover[s];
  for (int s : c.spec_b.site_map)
    if (s >= 0) ++cover[s];
  c.projection_ok = true;
  for (int s = 0; s < sites; ++s)
    if (cover[s] != 1) {
      c.projection_ok = false;
      c.witness = "site " + std::to_string(s) + " covered " + std::to_string(cover[s]) + " times";
      return c;
    }
  const long long na = c.space_a.size(), nb = c.space_b.size();
  c.state_of.assign(na * nb, -1);
  auto project = [&](const State& s, const FactorSpec& f) {
    State out(f.site_map.size(), 0);
    for (size_t k = 0; k < f.site_map.size(); ++k)
      if (f.site_map[k] >= 0) out[k] = s[f.site_map[k]];
    return out;
  };
  bool injective = true;
  for (int i : c.members) {
    const State& s = sp.states[i];
    for (auto [site, v] : c.fixed)
      if (s[site] != v) {
        c.projection_ok = false;
        c.witness = "state " + std::to_string(i) + " disagrees with fixed site " + std::to_string(site);
        return c;
      }
    const int ia = c.space_a.index_of(project(s, c.spec_a));
    const int ib = c.space_b.index_of(project(s, c.spec_b));
    if (ia < 0 || ib < 0) {
      c.projection_ok = false;
      c.witness = "state " + std::to_string(i) + " projects outside factor " + (ia < 0 ? "A" : "B");
      return c;
    }
    c.pair_of.push_back({ia, ib});
    auto& slot = c.state_of[ia * nb + ib];
    if (slot >= 0 && injective) {
      injective = false;
      c.witness = "states " + std::to_string(slot) + " and " + std::to_string(i) + " share a factor pair";
    }
    slot = i;
  }
  long long hit = 0;
  for (int x : c.state_of) hit += x >= 0;
  c.bijection_ok = injective && hit == na * nb;
  if (injective && !c.bijection_ok) {
    for (long long k = 0; k < na * nb; ++k)
      if (c.state_of[k] < 0) {
        c.witness = "factor pair (" + std::to_string(k / nb) + "," + std::to_string(k % nb) + ") has no state";
        break;
      }
  }
  std::vector<int> pos(sp.size(), -1);
  for (size_t k = 0; k < c.members.size(); ++k) pos[c.members[k]] = static_cast<int>(k);
  auto adjacent = [](const StateSpace& f, int x, int y) {
    return std::binary_search(f.adj[x].begin(), f.adj[x].end(), y);
  };
  bool mapped = true;
  for (size_t k = 0; k < c.members.size(); ++k) {
    const int i = c.members[k];
    for (int j : sp.adj[i]) {
      if (j <= i || pos[j] < 0) continue;
      ++c.intra_edges;
      auto [a1, b1] = c.pair_of[k];
      auto [a2, b2] = c.pair_of[pos[j]];
      const bool ok = (a1 == a2 && adjacent(c.space_b, b1, b2)) || (b1 == b2 && adjacent(c.space_a, a1, a2));
      if (!ok && mapped) {
        mapped = false;
        if (c.witness.empty())
          c.witness = "edge (" + std::to_string(i) + "," + std::to_string(j) + ") is not a product edge";
      }
    }
  }
  c.product_edges = static_cast<long long>(c.space_a.edges.size()) * nb + static_cast<long long>(c.space_b.edges.size()) * na;
  c.edges_ok = mapped && c.intra_edges == c.product_edges;
  if (mapped && !c.edges_ok && c.witness.empty())
    c.witness = "intra edges " + std::to_string(c.intra_edges) + " != product edges " + std::to_string(c.product_edges);
  return c;
}

namespace {

struct Side {
  std::vector<char> in;
  std::vector<int> verts;
};

struct Ctx {
  const StateSpace& sp;
  const ClassPartition& part;
  int cls;
  const Graph& g;
  std::vector<int> tv;  // trace value per site, -1 off trace
  std::vector<char> inX;
  Side sides[2];

  Ctx(const StateSpace& s, const ClassPartition& p, int c) : sp(s), part(p), cls(c), g(s.graph) {
    tv.assign(num_sites(g, sp.params), -1);
    for (size_t k = 0; k < part.trace_sites.size(); ++k) tv[part.trace_sites[k]] = part.traces[cls][k];
    inX.assign(g.n(), 0);
    for (int x : part.sep.X) inX[x] = 1;
    const std::vector<int>* vs[2] = {&part.sep.A, &part.sep.B};
    for (int k = 0; k < 2; ++k) {
      sides[k].in.assign(g.n(), 0);
      sides[k].verts = *vs[k];
      for (int v : *vs[k]) sides[k].in[v] = 1;
    }
  }

  // X vertex value in the trace (vertex chains only)
  int xval(int x) const { return tv[x]; }
  bool adj_to_T(int v) const {
    for (int w : g.neighbors(v))
      if (inX[w] && tv[w] > 0) return true;
    return false;
  }
  int t_degree(int v) const {
    int d = 0;
    for (int e : g.incident_edges(v)) d += tv[e] > 0;
    return d;
  }
  std::vector<std::pair<int, std::uint8_t>> trace_fixed() const {
    std::vector<std::pair<int, std::uint8_t>> f;
    for (size_t k = 0; k < part.trace_sites.size(); ++k) f.push_back({part.trace_sites[k], part.traces[cls][k]});
    return f;
  }
};

FactorSpec vertex_factor(const Graph& g, const ChainParams& p, const std::vector<int>& verts) {
  Subgraph sub = induced_subgraph(g, verts);
  return {std::move(sub.graph), p, std::move(sub.vertex_of)};
}

// independent sets: G[S - N(T)]
FactorSpec is_factor(Ctx& c, int k, std::vector<std::pair<int, std::uint8_t>>& fixed) {
  std::vector<int> keep;
  for (int v : c.sides[k].verts) {
    if (c.adj_to_T(v)) fixed.push_back({v, 0});
    else keep.push_back(v);
  }
  return vertex_factor(c.g, c.sp.params, keep);
}

// list colorings: G[S] with X-neighbor colors removed from lists
FactorSpec color_factor(Ctx& c, int k, std::vector<std::pair<int, std::uint8_t>>& fixed) {
  const int q = c.sp.params.q;
  std::vector<int> keep;
  std::vector<std::vector<int>> lists;
  for (int v : c.sides[k].verts) {
    std::vector<int> l;
    for (int col : c.g.color_list(v, q)) {
      bool blocked = false;
      for (int w : c.g.neighbors(v))
        if (c.inX[w] && c.tv[w] == col) blocked = true;
      if (!blocked) l.push_back(col);
    }
    if (l.empty()) {
      if (c.sp.params.kind == ChainKind::q_coloring) throw ChainError("color_factor: empty list in a nonempty class");
      fixed.push_back({v, 0});
      continue;
    }
    keep.push_back(v);
    lists.push_back(std::move(l));
  }
  FactorSpec f = vertex_factor(c.g, c.sp.params, keep);
  f.graph.set_color_lists(std::move(lists));
  return f;
}

// b-matchings: G[S] minus `drop`, b reduced by selected trace edges and `drop`
FactorSpec bm_factor(Ctx& c, int k, const std::vector<int>& drop) {
  const auto& verts = c.sides[k].verts;
  std::set<int> gone(drop.begin(), drop.end());
  std::vector<int> es;
  for (int e = 0; e < c.g.m(); ++e) {
    auto [u, v] = c.g.edges()[e];
    if (c.sides[k].in[u] && c.sides[k].in[v] && !gone.count(e)) es.push_back(e);
  }
  Subgraph sub = edge_subgraph(c.g, verts, es);
  std::vector<int> b;
  for (int v : sub.vertex_of) {
    int d = c.t_degree(v);
    for (int e : c.g.incident_edges(v)) d += gone.count(e);
    b.push_back(c.g.b(v) - d);
  }
  sub.graph.set_b_values(std::move(b));
  return {std::move(sub.graph), c.sp.params, std::move(sub.edge_of)};
}

// b-edge covers: edges touching S; X vertices demand beta
FactorSpec bec_factor(Ctx& c, int k, const std::vector<int>& beta) {
  std::vector<int> verts = c.sides[k].verts;
  verts.insert(verts.end(), c.part.sep.X.begin(), c.part.sep.X.end());
  std::vector<int> es;
  for (int e = 0; e < c.g.m(); ++e) {
    auto [u, v] = c.g.edges()[e];
    if (c.sides[k].in[u] || c.sides[k].in[v]) es.push_back(e);
  }
  Subgraph sub = edge_subgraph(c.g, verts, es);
  std::vector<int> b;
  for (int v : sub.vertex_of) {
    if (c.inX[v]) {
      const int idx = static_cast<int>(std::lower_bound(c.part.sep.X.begin(), c.part.sep.X.end(), v) - c.part.sep.X.begin());
      b.push_back(beta[idx]);
    } else {
      b.push_back(c.g.b(v));
    }
  }
  sub.graph.set_b_values(std::move(b));
  return {std::move(sub.graph), c.sp.params, std::move(sub.edge_of)};
}

// CSDS: S minus forbidden vertices dominated by T, plus the separator vertices
// `extra` that S must dominate (forbidden, auxiliary sites).
FactorSpec csds_factor(Ctx& c, int k, const std::vector<int>& extra, std::vector<std::pair<int, std::uint8_t>>& fixed) {
  std::vector<int> keep;
  for (int v : c.sides[k].verts) {
    if (c.adj_to_T(v) && c.g.role(v) == Role::forbidden) fixed.push_back({v, 0});
    else keep.push_back(v);
  }
  std::vector<int> verts = keep;
  verts.insert(verts.end(), extra.begin(), extra.end());
  Subgraph sub = induced_subgraph(c.g, verts);
  std::vector<Role> roles;
  std::vector<int> map;
  for (int v : sub.vertex_of) {
    if (c.inX[v]) {
      roles.push_back(Role::forbidden);
      map.push_back(-1);
    } else {
      roles.push_back(c.adj_to_T(v) ? Role::steiner : c.g.role(v));
      map.push_back(v);
    }
  }
  sub.graph.set_roles(std::move(roles));
  return {std::move(sub.graph), c.sp.params, std::move(map)};
}

// maximal independent sets: G[S - N[C] - N(T)]
FactorSpec mis_factor(Ctx& c, int k, const std::vector<char>& inC, std::vector<std::pair<int, std::uint8_t>>& fixed) {
  std::vector<int> keep;
  for (int v : c.sides[k].verts) {
    if (inC[v]) {
      fixed.push_back({v, 1});
      continue;
    }
    bool nc = false;
    for (int w : c.g.neighbors(v)) nc |= inC[w] != 0;
    if (nc || c.adj_to_T(v)) fixed.push_back({v, 0});
    else keep.push_back(v);
  }
  return vertex_factor(c.g, c.sp.params, keep);
}

std::string list_label(const char* name, const std::vector<int>& xs) {
  std::ostringstream os;
  os << name << "={";
  for (size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
  os << '}';
  return os.str();
}

// U for CSDS: unselected non-Steiner separator vertices not dominated by T
std::vector<int> csds_U(const Ctx& c) {
  std::vector<int> U;
  for (int x : c.part.sep.X)
    if (c.tv[x] == 0 && c.g.role(x) != Role::steiner && !c.adj_to_T(x)) U.push_back(x);
  return U;
}

std::vector<int> mis_U(const Ctx& c) {
  std::vector<int> U;
  for (int x : c.part.sep.X)
    if (c.tv[x] == 0 && !c.adj_to_T(x)) U.push_back(x);
  return U;
}

// unsaturated separator vertices and the side vertices they force to saturate
std::vector<int> mbm_R(const Ctx& c) {
  std::set<int> R;
  for (int x : c.part.sep.X) {
    if (c.t_degree(x) >= c.g.b(x)) continue;
    const auto& nb = c.g.neighbors(x);
    const auto& ie = c.g.incident_edges(x);
    for (size_t i = 0; i < nb.size(); ++i)
      if (!c.inX[nb[i]] && c.tv[ie[i]] == 0) R.insert(nb[i]);
  }
  return {R.begin(), R.end()};
}

struct Labeled {
  std::string label;
  std::vector<int> members;
  FactorSpec a, b;
  std::vector<std::pair<int, std::uint8_t>> fixed;
};

Labeled class_level(Ctx& c) {
  Labeled L;
  L.label = "class";
  L.members = c.part.members[c.cls];
  L.fixed = c.trace_fixed();
  switch (c.sp.params.kind) {
    case ChainKind::independent_set:
      L.a = is_factor(c, 0, L.fixed);
      L.b = is_factor(c, 1, L.fixed);
      break;
    case ChainKind::q_coloring:
    case ChainKind::partial_q_coloring:
      L.a = color_factor(c, 0, L.fixed);
      L.b = color_factor(c, 1, L.fixed);
      break;
    case ChainKind::b_matching:
    case ChainKind::maximal_b_matching:
      L.a = bm_factor(c, 0, {});
      L.b = bm_factor(c, 1, {});
      break;
    case ChainKind::b_edge_cover: {
      std::vector<int> zero(c.part.sep.X.size(), 0);
      L.a = bec_factor(c, 0, zero);
      L.b = bec_factor(c, 1, zero);
      break;
    }
    case ChainKind::csds:
      L.a = csds_factor(c, 0, {}, L.fixed);
      L.b = csds_factor(c, 1, {}, L.fixed);
      for (int x : csds_U(c)) (void)x;
      break;
    case ChainKind::maximal_independent_set: {
      std::vector<char> none(c.g.n(), 0);
      L.a = mis_factor(c, 0, none, L.fixed);
      L.b = mis_factor(c, 1, none, L.fixed);
      break;
    }
  }
  return L;
}

std::vector<Labeled> subclass_labels(Ctx& c) {
  std::vector<Labeled> out;
  const auto& cls_members = c.part.members[c.cls];
  const Graph& g = c.g;
  const auto& X = c.part.sep.X;
  auto filter = [&](const std::function<bool(const State&)>& pred) {
    std::vector<int> m;
    for (int i : cls_members)
      if (pred(c.sp.states[i])) m.push_back(i);
    return m;
  };
  switch (c.sp.params.kind) {
    case ChainKind::b_edge_cover: {
      int bmax = 0;
      for (int x : X) bmax = std::max(bmax, g.b(x));
      if (bmax > 4 || X.size() > 8) throw ChainError("beta splits limited to b <= 4 and |X| <= 8");
      const int nx = static_cast<int>(X.size());
      std::vector<int> bp(nx), lo(nx), hi(nx), dA(nx, 0), dB(nx, 0);
      for (int i = 0; i < nx; ++i) {
        const int x = X[i];
        bp[i] = std::max(0, g.b(x) - c.t_degree(x));
        for (int w : g.neighbors(x)) {
          dA[i] += c.sides[0].in[w];
          dB[i] += c.sides[1].in[w];
        }
        lo[i] = std::max(0, bp[i] - dB[i]);
        hi[i] = std::min(bp[i], dA[i]);
      }
      std::vector<int> beta(lo);
      if (nx > 0)
        for (int i = 0; i < nx; ++i)
          if (lo[i] > hi[i]) return out;
      while (true) {
        std::vector<int> bbar(nx);
        for (int i = 0; i < nx; ++i) bbar[i] = bp[i] - beta[i];
        Labeled L;
        L.label = list_label("beta", beta);
        L.members = filter([&](const State& s) {
          for (int i = 0; i < nx; ++i) {
            int a = 0, b = 0;
            const auto& nb = g.neighbors(X[i]);
            const auto& ie = g.incident_edges(X[i]);
            for (size_t k = 0; k < nb.size(); ++k) {
              if (c.sides[0].in[nb[k]]) a += s[ie[k]];
              if (c.sides[1].in[nb[k]]) b += s[ie[k]];
            }
            if (a < beta[i] || b < bbar[i]) return false;
          }
          return true;
        });
        L.fixed = c.trace_fixed();
        L.a = bec_factor(c, 0, beta);
        L.b = bec_factor(c, 1, bbar);
        out.push_back(std::move(L));
        int i = nx - 1;
        while (i >= 0 && beta[i] == hi[i]) beta[i] = lo[i], --i;
        if (i < 0) break;
        ++beta[i];
      }
      break;
    }
    case ChainKind::csds: {
      const auto U = csds_U(c);
      const int nu = static_cast<int>(U.size());
      for (std::uint32_t mask = 0; mask < (1u << nu); ++mask) {
        std::vector<int> W, Wbar;
        for (int i = 0; i < nu; ++i) (mask >> i & 1 ? W : Wbar).push_back(U[i]);
        Labeled L;
        L.label = list_label("W", W);
        L.members = filter([&](const State& s) {
          for (int i = 0; i < nu; ++i) {
            const int side = mask >> i & 1 ? 0 : 1;
            bool dom = false;
            for (int w : g.neighbors(U[i]))
              if (c.sides[side].in[w] && s[w]) dom = true;
            if (!dom) return false;
          }
          return true;
        });
        L.fixed = c.trace_fixed();
        L.a = csds_factor(c, 0, W, L.fixed);
        L.b = csds_factor(c, 1, Wbar, L.fixed);
        out.push_back(std::move(L));
      }
      break;
    }
    case ChainKind::maximal_independent_set: {
      const auto U = mis_U(c);
      std::set<int> cand_set;
      for (int u : U)
        for (int w : g.neighbors(u))
          if (!c.inX[w] && !c.adj_to_T(w)) cand_set.insert(w);
      std::vector<int> cand(cand_set.begin(), cand_set.end());
      if (cand.size() > 24) throw ChainError("maximal_independent_set: too many cover candidates");
      std::vector<char> inC(g.n(), 0);
      std::vector<int> C;
      std::function<void(size_t)> rec = [&](size_t i) {
        if (i == cand.size()) {
          for (int u : U) {
            bool cov = false;
            for (int w : g.neighbors(u)) cov |= inC[w] != 0;
            if (!cov) return;
          }
          Labeled L;
          L.label = list_label("C", C);
          L.members = filter([&](const State& s) {
            for (int v : C)
              if (!s[v]) return false;
            return true;
          });
          L.fixed = c.trace_fixed();
          L.a = mis_factor(c, 0, inC, L.fixed);
          L.b = mis_factor(c, 1, inC, L.fixed);
          out.push_back(std::move(L));
          return;
        }
        const int v = cand[i];
        rec(i + 1);
        bool free = true;
        for (int w : g.neighbors(v)) free &= !inC[w];
        if (free) {
          inC[v] = 1;
          C.push_back(v);
          rec(i + 1);
          C.pop_back();
          inC[v] = 0;
        }
      };
      rec(0);
      break;
    }
    case ChainKind::maximal_b_matching: {
      const auto R = mbm_R(c);
      std::vector<char> inR(g.n(), 0);
      for (int u : R) inR[u] = 1;
      std::vector<int> cand;
      for (int e = 0; e < g.m(); ++e) {
        auto [u, v] = g.edges()[e];
        if (c.inX[u] || c.inX[v]) continue;
        if (inR[u] || inR[v]) cand.push_back(e);
      }
      if (cand.size() > 24) throw ChainError("maximal_b_matching: too many saturation candidates");
      std::vector<int> deg(g.n());
      for (int v = 0; v < g.n(); ++v) deg[v] = c.t_degree(v);
      std::vector<int> C;
      std::function<void(size_t)> rec = [&](size_t i) {
        if (i == cand.size()) {
          for (int u : R)
            if (deg[u] != g.b(u)) return;
          Labeled L;
          L.label = list_label("C", C);
          L.members = filter([&](const State& s) {
            for (int e : C)
              if (!s[e]) return false;
            return true;
          });
          L.fixed = c.trace_fixed();
          for (int e : C) L.fixed.push_back({e, 1});
          L.a = bm_factor(c, 0, C);
          L.b = bm_factor(c, 1, C);
          out.push_back(std::move(L));
          return;
        }
        rec(i + 1);
        const int e = cand[i];
        auto [u, v] = g.edges()[e];
        if (deg[u] < g.b(u) && deg[v] < g.b(v)) {
          ++deg[u], ++deg[v];
          C.push_back(e);
          rec(i + 1);
          C.pop_back();
          --deg[u], --deg[v];
        }
      };
      rec(0);
      break;
    }
    default:
      throw ChainError("subclass_decompose: chain kind has plain product classes");
  }
  return out;
}

}  // namespace

ProductCertificate certify_cartesian_product(const StateSpace& sp, const ClassPartition& part, int cls) {
  Ctx c(sp, part, cls);
  Labeled L = class_level(c);
  return certify_with_factors(sp, std::move(L.members), std::move(L.a), std::move(L.b), std::move(L.fixed),
                              part.label(cls));
}

namespace {

// Fills overlaps, min_overlap_fraction and linked from the subclass members.
void link_subclasses(const StateSpace& sp, SubclassCover& cov) {
  const int k = static_cast<int>(cov.subclasses.size());
  cov.overlaps.clear();
  cov.min_overlap_fraction = 1;
  std::vector<int> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  std::vector<std::vector<int>> where(sp.size());
  for (int a = 0; a < k; ++a)
    for (int i : cov.subclasses[a].cert.members) where[i].push_back(a);
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      const auto& ma = cov.subclasses[a].cert.members;
      const auto& mb = cov.subclasses[b].cert.members;
      std::vector<int> shared;
      std::set_intersection(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(shared));
      if (shared.empty()) continue;
      cov.overlaps.push_back({a, b, static_cast<int>(shared.size())});
      cov.min_overlap_fraction =
          std::min(cov.min_overlap_fraction, static_cast<double>(shared.size()) / std::min(ma.size(), mb.size()));
      parent[find(a)] = find(b);
    }
  for (int i = 0; i < sp.size(); ++i)
    for (int j : sp.adj[i])
      for (int a : where[i])
        for (int b : where[j]) parent[find(a)] = find(b);
  int roots = 0;
  for (int a = 0; a < k; ++a) roots += find(a) == a;
  cov.linked = roots == 1;
}

}  // namespace

SubclassCover subclass_decompose(const StateSpace& sp, const ClassPartition& part, int cls) {
  Ctx c(sp, part, cls);
  auto labels = subclass_labels(c);
  SubclassCover cov;
  cov.cls = cls;
  const auto& members = part.members[cls];
  std::vector<int> mult(sp.size(), 0);
  const ChainKind kind = sp.params.kind;
  if (kind == ChainKind::b_edge_cover) {
    int bmax = 0;
    for (int x : part.sep.X) bmax = std::max(bmax, sp.graph.b(x));
    cov.multiplicity_bound = static_cast<int>(std::pow(bmax + 1, part.sep.X.size()));
    cov.ratio_bound = std::pow(2.0, bmax * static_cast<double>(part.sep.X.size()));
  } else if (kind == ChainKind::csds) {
    cov.U_size = static_cast<int>(csds_U(c).size());
    cov.multiplicity_bound = 1 << cov.U_size;
    cov.ratio_bound = std::pow(2.0, cov.U_size);
  } else {
    cov.U_size = static_cast<int>((kind == ChainKind::maximal_independent_set ? mis_U(c) : mbm_R(c)).size());
    cov.multiplicity_bound = static_cast<int>(labels.size());
  }
  for (auto& L : labels) {
    if (L.members.empty()) continue;
    for (int i : L.members) ++mult[i];
    Subclass sc;
    sc.label = L.label;
    sc.cert = certify_with_factors(sp, std::move(L.members), std::move(L.a), std::move(L.b), std::move(L.fixed), L.label);
    cov.subclasses.push_back(std::move(sc));
  }
  cov.union_ok = !cov.subclasses.empty();
  for (int i : members) {
    if (mult[i] == 0) cov.union_ok = false;
    cov.max_multiplicity = std::max(cov.max_multiplicity, mult[i]);
  }
  cov.all_certified = true;
  size_t smallest = members.size();
  for (const auto& sc : cov.subclasses) {
    cov.all_certified &= sc.cert.ok();
    smallest = std::min(smallest, sc.cert.members.size());
  }
  cov.max_size_ratio = smallest ? static_cast<double>(members.size()) / smallest : 0;
  link_subclasses(sp, cov);
  return cov;
}

SubclassCover merge_covers(const StateSpace& sp, const std::vector<SubclassCover>& covers) {
  SubclassCover out;
  out.union_ok = out.all_certified = !covers.empty();
  for (const auto& c : covers) {
    out.union_ok &= c.union_ok;
    out.all_certified &= c.all_certified;
    out.max_multiplicity = std::max(out.max_multiplicity, c.max_multiplicity);
    out.multiplicity_bound = std::max(out.multiplicity_bound, c.multiplicity_bound);
    out.max_size_ratio = std::max(out.max_size_ratio, c.max_size_ratio);
    out.ratio_bound = std::max(out.ratio_bound, c.ratio_bound);
    out.U_size = std::max(out.U_size, c.U_size);
    out.subclasses.insert(out.subclasses.end(), c.subclasses.begin(), c.subclasses.end());
  }
  link_subclasses(sp, out);
  return out;
}

// ---- order ----

namespace {

// child -> parent relation between two traces
bool covers(const State& parent, const State& child, bool upward) {
  int diff = 0;
  for (size_t i = 0; i < parent.size(); ++i) {
    if (parent[i] == child[i]) continue;
    ++diff;
    if (upward ? !(child[i] == 0 && parent[i] == 1) : !(parent[i] == 0 && child[i] != 0)) return false;
  }
  return diff == 1;
}

bool above(const State& anc, const State& desc, bool upward) {
  bool strict = false;
  for (size_t i = 0; i < anc.size(); ++i) {
    if (anc[i] == desc[i]) continue;
    strict = true;
    if (upward ? !(desc[i] == 0 && anc[i] == 1) : !(anc[i] == 0)) return false;
  }
  return strict;
}

}  // namespace

TraceOrder build_trace_order(const StateSpace& sp, const ClassPartition& part) {
  const ChainKind kind = sp.params.kind;
  if (!hierarchical_kind(kind)) throw ChainError("build_trace_order: chain kind has no trace order");
  TraceOrder o;
  o.upward = kind == ChainKind::b_edge_cover || kind == ChainKind::csds;
  const int K = part.size();
  o.parents.assign(K, {});
  for (int c = 0; c < K; ++c)
    for (int p = 0; p < K; ++p)
      if (covers(part.traces[p], part.traces[c], o.upward)) o.parents[c].push_back(p);
  for (int c = 0; c < K; ++c)
    if (o.parents[c].empty()) o.roots.push_back(c);
  o.unique_max = o.roots.size() == 1;
  if (!o.unique_max) o.witness = "classes without parent: " + std::to_string(o.roots.size());
  for (int a = 0; a < K && o.sizes_ok; ++a)
    for (int d = 0; d < K; ++d)
      if (above(part.traces[a], part.traces[d], o.upward) && part.members[a].size() < part.members[d].size()) {
        o.sizes_ok = false;
        o.witness = "ancestor " + part.label(a) + " smaller than " + part.label(d);
        break;
      }
  for (int c = 0; c < K && o.matching_ok; ++c)
    for (int p : o.parents[c]) {
      const auto& es = part.between(c, p);
      std::map<int, int> deg;
      for (int e : es) {
        ++deg[sp.edges[e].first];
        ++deg[sp.edges[e].second];
      }
      bool ok = es.size() == part.members[c].size();
      for (int s : part.members[c]) ok &= deg[s] == 1;
      for (int s : part.members[p]) ok &= deg[s] <= 1;
      if (!ok) {
        o.matching_ok = false;
        o.witness = "edges between " + part.label(p) + " and " + part.label(c) + " are not a matching onto the child";
        break;
      }
    }
  return o;
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::nonhier: return "nonhier";
    case Variant::hier: return "hier";
    case Variant::relaxed_hier: return "relaxed_hier";
    case Variant::relaxed_nonhier: return "relaxed_nonhier";
  }
  return "?";
}

Variant default_variant(ChainKind k) {
  switch (k) {
    case ChainKind::independent_set:
    case ChainKind::partial_q_coloring:
    case ChainKind::b_matching:
      return Variant::hier;
    case ChainKind::q_coloring:
      return Variant::nonhier;
    case ChainKind::b_edge_cover:
    case ChainKind::csds:
      return Variant::relaxed_hier;
    default:
      return Variant::relaxed_nonhier;
  }
}

bool ConditionReport::ok() const {
  for (const auto& l : lines)
    if (l.checked && !l.pass) return false;
  return true;
}

std::string ConditionReport::text() const {
  std::ostringstream os;
  os << "variant " << variant_name(variant) << '\n';
  for (const auto& l : lines) {
    os << (l.checked ? (l.pass ? "PASS " : "FAIL ") : "MEAS ") << l.name << " = " << l.value;
    if (!l.detail.empty()) os << "  (" << l.detail << ")";
    os << '\n';
  }
  return os.str();
}

ConditionReport verify_framework_conditions(const StateSpace& sp, const ClassPartition& part, Variant v,
                                            const std::vector<SubclassCover>* covers, double overlap_floor) {
  ConditionReport r;
  r.variant = v;
  auto line = [&](std::string name, bool checked, bool pass, double value, std::string detail = "") {
    r.lines.push_back({std::move(name), checked, pass, value, std::move(detail)});
  };
  const int K = part.size();
  const ChainKind kind = sp.params.kind;
  long long total = 0;
  for (const auto& m : part.members) total += m.size();
  line("partition", true, total == sp.size(), static_cast<double>(total));
  const double nx = static_cast<double>(part.sep.X.size());
  if (kind == ChainKind::independent_set)
    line("class_count<=2^|X|", true, K <= std::pow(2.0, nx), K);
  else if (kind == ChainKind::partial_q_coloring)
    line("class_count<=(q+1)^|X|", true, K <= std::pow(sp.params.q + 1.0, nx), K);
  else
    line("class_count", false, true, K);
  size_t mn = sp.size(), mx = 0;
  for (const auto& m : part.members) mn = std::min(mn, m.size()), mx = std::max(mx, m.size());
  const double ratio = mn ? static_cast<double>(mx) / mn : 0;
  if (kind == ChainKind::independent_set)
    line("class_size_ratio<=2^{|X|Delta}", true, ratio <= std::pow(2.0, nx * sp.graph.max_degree()), ratio);
  else
    line("class_size_ratio", false, true, ratio);
  // moves from one state into one other class
  int inter = 0;
  for (int i = 0; i < sp.size(); ++i) {
    std::map<int, int> per;
    for (int j : sp.adj[i])
      if (part.class_of[j] != part.class_of[i]) inter = std::max(inter, ++per[part.class_of[j]]);
  }
  if (kind == ChainKind::independent_set)
    line("inter_class_moves_per_state<=1", true, inter <= 1, inter);
  else
    line("inter_class_moves_per_state", false, true, inter);
  double frac = K > 1 ? 1e300 : 0;
  size_t emin = 0;
  for (const auto& [key, es] : part.boundary) {
    const size_t small = std::min(part.members[key.first].size(), part.members[key.second].size());
    frac = std::min(frac, static_cast<double>(es.size()) / small);
    emin = emin ? std::min(emin, es.size()) : es.size();
  }
  line("boundary_fraction_min", false, true, frac);
  line("E_min", false, true, static_cast<double>(emin));
  // class graph connectivity
  std::vector<char> seen(K, 0);
  std::vector<int> q{0};
  if (K > 0) seen[0] = 1;
  for (size_t i = 0; i < q.size(); ++i)
    for (int b : part.class_adj[q[i]])
      if (!seen[b]) seen[b] = 1, q.push_back(b);
  line("class_graph_connected", true, static_cast<int>(q.size()) == K, static_cast<double>(q.size()));
  if (v == Variant::nonhier || v == Variant::hier) {
    int bad = 0;
    std::string first;
    for (int c = 0; c < K; ++c) {
      auto cert = certify_cartesian_product(sp, part, c);
      if (!cert.ok()) {
        ++bad;
        if (first.empty()) first = part.label(c) + ": " + cert.witness;
      }
    }
    line("classes_are_products", true, bad == 0, bad, first);
  }
  if (v == Variant::hier || v == Variant::relaxed_hier) {
    auto o = build_trace_order(sp, part);
    line("order_sizes", true, o.sizes_ok, 0, o.sizes_ok ? "" : o.witness);
    line("order_unique_max", true, o.unique_max, static_cast<double>(o.roots.size()));
    line("order_matching", true, o.matching_ok, 0, o.matching_ok ? "" : o.witness);
  }
  if (v == Variant::relaxed_hier || v == Variant::relaxed_nonhier) {
    if (!covers) {
      line("subclass_covers", true, false, 0, "no covers supplied");
    } else {
      bool uni = true, cert = true, linked = true, mult = true;
      double ov = 1, rmax = 0;
      // Maximal kinds treat the subclasses themselves as overlapping classes,
      // so only the union over all classes has to be linked.
      if (v == Variant::relaxed_nonhier) linked = merge_covers(sp, *covers).linked;
      for (const auto& c : *covers) {
        uni &= c.union_ok;
        cert &= c.all_certified;
        if (v == Variant::relaxed_hier) linked &= c.linked;
        mult &= c.max_multiplicity <= c.multiplicity_bound;
        if (!c.overlaps.empty()) ov = std::min(ov, c.min_overlap_fraction);
        rmax = std::max(rmax, c.max_size_ratio);
      }
      line("subclass_union", true, uni, static_cast<double>(covers->size()));
      line("subclass_products", true, cert, 0);
      line("subclass_multiplicity", true, mult, 0);
      line("subclass_linked", true, linked, 0);
      line("subclass_overlap_fraction", true, ov >= overlap_floor, ov, "floor " + std::to_string(overlap_floor));
      line("subclass_size_ratio", false, true, rmax);
    }
  }
  return r;
}

std::string partition_report(const StateSpace& sp, const ClassPartition& part) {
  std::ostringstream os;
  os << "# partition chain=" << chain_name(sp.params.kind) << " states=" << sp.size() << " classes=" << part.size()
     << '\n';
  os << "X";
  for (int x : part.sep.X) os << ' ' << x;
  os << "\nA";
  for (int x : part.sep.A) os << ' ' << x;
  os << "\nB";
  for (int x : part.sep.B) os << ' ' << x;
  os << '\n';
  for (int c = 0; c < part.size(); ++c)
    os << "class " << c << " trace=" << part.label(c) << " size=" << part.members[c].size()
       << " intra_edges=" << part.intra[c].size() << '\n';
  for (const auto& [key, es] : part.boundary)
    os << "boundary " << key.first << ' ' << key.second << " edges=" << es.size() << '\n';
  return os.str();
}

}  // namespace gd
