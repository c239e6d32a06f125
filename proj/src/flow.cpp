#include "gd/flow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "gd/decomposition.hpp"
#include "gd/rng.hpp"

namespace gd {

const char* demand_name(Demand d) { return d == Demand::uniform ? "uniform" : "weighted"; }

int FlowGraph::directed(int u, int v) const {
  const auto& a = adj[u];
  auto it = std::lower_bound(a.begin(), a.end(), v);
  if (it == a.end() || *it != v) return -1;
  const int e = adj_edge[u][it - a.begin()];
  return 2 * e + (edges[e].first == u ? 0 : 1);
}

FlowGraph make_flow_graph(int n, std::vector<std::pair<int, int>> edges, std::vector<double> pi, std::vector<double> Q) {
  FlowGraph g;
  g.n = n;
  g.edges = std::move(edges);
  g.pi = std::move(pi);
  g.Q = std::move(Q);
  std::vector<std::vector<std::pair<int, int>>> tmp(n);
  for (int e = 0; e < g.m(); ++e) {
    auto [u, v] = g.edges[e];
    tmp[u].push_back({v, e});
    tmp[v].push_back({u, e});
  }
  g.adj.resize(n);
  g.adj_edge.resize(n);
  for (int v = 0; v < n; ++v) {
    std::sort(tmp[v].begin(), tmp[v].end());
    for (auto [w, e] : tmp[v]) {
      g.adj[v].push_back(w);
      g.adj_edge[v].push_back(e);
    }
  }
  return g;
}

FlowGraph flow_graph(const StateSpace& sp) {
  std::vector<double> Q(sp.edges.size(), 0);
  for (int i = 0; i < sp.size(); ++i)
    for (size_t k = 0; k < sp.adj[i].size(); ++k)
      if (sp.adj[i][k] > i) Q[sp.adj_edge[i][k]] = sp.edge_flow(i, static_cast<int>(k));
  return make_flow_graph(sp.size(), sp.edges, sp.pi, std::move(Q));
}

FlowGraph random_flow_graph(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.push_back({static_cast<int>(rng.below(i)), i});
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.below(n) < 2) edges.push_back({u, v});
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<double> pi(n);
  double z = 0;
  for (auto& p : pi) z += p = 0.5 + rng.uniform();
  for (auto& p : pi) p /= z;
  std::vector<int> deg(n, 0);
  for (auto [u, v] : edges) ++deg[u], ++deg[v];
  const int dmax = n > 1 ? *std::max_element(deg.begin(), deg.end()) : 1;
  // Metropolis chain: P(u, v) = min(1, pi(v)/pi(u)) / (2 dmax) is reversible
  std::vector<double> Q;
  for (auto [u, v] : edges) Q.push_back(std::min(pi[u], pi[v]) / (2.0 * dmax));
  return make_flow_graph(n, std::move(edges), std::move(pi), std::move(Q));
}

namespace {

using Measure = std::vector<std::pair<int, double>>;  // (vertex, mass)

struct Acc {
  std::vector<double> v;
  std::vector<int> idx;
  std::vector<char> on;
  explicit Acc(size_t n = 0) : v(n, 0), on(n, 0) {}
  void add(int d, double x) {
    if (!on[d]) on[d] = 1, idx.push_back(d);
    v[d] += x;
  }
  void clear() {
    for (int d : idx) v[d] = 0, on[d] = 0;
    idx.clear();
  }
  SparseFlow take() {
    std::sort(idx.begin(), idx.end());
    SparseFlow out;
    out.reserve(idx.size());
    for (int d : idx)
      if (v[d] != 0) out.push_back({d, v[d]});
    clear();
    return out;
  }
};

void add_into(Acc& out, const SparseFlow& f, double c, bool rev) {
  const int x = rev ? 1 : 0;
  for (auto [d, a] : f) out.add(d ^ x, c * a);
}

// max over vertices of |net outflow - (source - sink)|
double residual(const FlowGraph& g, const SparseFlow& f, const Measure& source, const Measure& sink) {
  std::unordered_map<int, double> net;
  for (auto [d, a] : f) {
    net[g.tail(d)] += a;
    net[g.head(d)] -= a;
  }
  for (auto [v, m] : source) net[v] -= m;
  for (auto [v, m] : sink) net[v] += m;
  double worst = 0;
  for (auto& [v, x] : net) worst = std::max(worst, std::abs(x));
  return worst;
}

}  // namespace

double conservation_error(const FlowGraph& g, const SparseFlow& f, int s, int t) {
  return residual(g, f, {{s, 1.0}}, {{t, 1.0}});
}

// ---- schemes ----

// Unit flows between ordered pairs of a state set, plus hub flows from a state
// to the set's measure. Materialized flows are in directed edge ids of the host
// graph. Plan mode accumulates multipliers and expands them once in finalize().
class Scheme {
 public:
  Scheme(std::shared_ptr<const FlowGraph> host, Demand d) : host_(std::move(host)), demand_(d) {}
  virtual ~Scheme() = default;

  const FlowGraph& host() const { return *host_; }
  const std::vector<int>& domain() const { return domain_; }
  const Measure& measure() const { return measure_; }
  int depth() const { return depth_; }

  virtual void flow(int s, int t, double c, bool rev, Acc& out) = 0;
  virtual void hub(int x, double c, bool rev, Acc& out) = 0;

  virtual void begin_plan(Acc* agg) { agg_ = agg; }
  virtual void plan_flow(int s, int t, double c) { flow(s, t, c, false, *agg_); }
  virtual void plan_hub(int x, double c, bool rev) { hub(x, c, rev, *agg_); }
  virtual void finalize() {}
  virtual double plan_flow_residual(int s, int t) { return flow_residual(s, t); }
  virtual double plan_hub_residual(int x) { return hub_residual(x); }

  const SparseFlow& flow_vec(int s, int t) {
    const int n = host_->n;
    if (n <= kFlowCache) {
      if (flow_cache_.empty()) flow_cache_.resize(static_cast<size_t>(n) * n), flow_done_.assign(static_cast<size_t>(n) * n, 0);
      const size_t k = static_cast<size_t>(s) * n + t;
      if (!flow_done_[k]) {
        flow_cache_[k] = compute_flow(s, t);
        flow_done_[k] = 1;
      }
      return flow_cache_[k];
    }
    scratch_ = compute_flow(s, t);
    return scratch_;
  }

  const SparseFlow& hub_vec(int x) {
    if (hub_cache_.empty()) hub_cache_.resize(host_->n), hub_done_.assign(host_->n, 0), hub_res_.assign(host_->n, 0);
    if (!hub_done_[x]) {
      Acc& a = scratch_acc();
      hub(x, 1.0, false, a);
      hub_cache_[x] = a.take();
      hub_res_[x] = residual(*host_, hub_cache_[x], {{x, 1.0}}, measure_);
      hub_done_[x] = 1;
    }
    return hub_cache_[x];
  }

  double flow_residual(int s, int t) {
    const long long k = static_cast<long long>(s) * host_->n + t;
    auto it = flow_res_.find(k);
    if (it != flow_res_.end()) return it->second;
    flow_vec(s, t);
    return flow_res_.at(k);
  }

  double hub_residual(int x) {
    hub_vec(x);
    return hub_res_[x];
  }

 protected:
  static constexpr int kFlowCache = 160;

  Acc& scratch_acc() {
    if (acc_.v.size() != 2 * static_cast<size_t>(host_->m())) acc_ = Acc(2 * static_cast<size_t>(host_->m()));
    return acc_;
  }

  void set_uniform_or_pi() {
    measure_.clear();
    double z = 0;
    for (int v : domain_) z += demand_ == Demand::uniform ? 1.0 : host_->pi[v];
    for (int v : domain_) measure_.push_back({v, (demand_ == Demand::uniform ? 1.0 : host_->pi[v]) / z});
  }

  std::shared_ptr<const FlowGraph> host_;
  Demand demand_;
  std::vector<int> domain_;  // sorted host vertices
  Measure measure_;          // aligned with domain_
  Acc* agg_ = nullptr;
  int depth_ = 0;

 private:
  SparseFlow compute_flow(int s, int t) {
    Acc& a = scratch_acc();
    flow(s, t, 1.0, false, a);
    SparseFlow f = a.take();
    flow_res_[static_cast<long long>(s) * host_->n + t] = conservation_error(*host_, f, s, t);
    return f;
  }

  std::vector<SparseFlow> flow_cache_, hub_cache_;
  std::vector<char> flow_done_, hub_done_;
  std::vector<double> hub_res_;
  std::unordered_map<long long, double> flow_res_;
  SparseFlow scratch_;
  Acc acc_;
};

namespace {

// Shortest paths over the whole host graph; ties go to the smallest next state.
class PathScheme : public Scheme {
 public:
  PathScheme(std::shared_ptr<const FlowGraph> host, Demand d) : Scheme(std::move(host), d) {
    const int n = host_->n;
    for (int v = 0; v < n; ++v) domain_.push_back(v);
    set_uniform_or_pi();
    dist_.assign(static_cast<size_t>(n) * n, -1);
    for (int t = 0; t < n; ++t) {
      std::vector<int> q{t};
      at(t, t) = 0;
      for (size_t i = 0; i < q.size(); ++i)
        for (int w : host_->adj[q[i]])
          if (at(w, t) < 0) at(w, t) = at(q[i], t) + 1, q.push_back(w);
      if (static_cast<int>(q.size()) != n) throw FlowError("shortest paths: graph is disconnected");
    }
  }

  void flow(int s, int t, double c, bool rev, Acc& out) override {
    const int x = rev ? 1 : 0;
    while (s != t) {
      int next = -1;
      for (int w : host_->adj[s])
        if (at(w, t) == at(s, t) - 1) {
          next = w;
          break;
        }
      out.add(host_->directed(s, next) ^ x, c);
      s = next;
    }
  }

  void hub(int x, double c, bool rev, Acc& out) override {
    for (auto [t, m] : measure_)
      if (t != x) flow(x, t, c * m, rev, out);
  }

 private:
  int& at(int v, int t) { return dist_[static_cast<size_t>(v) * host_->n + t]; }
  std::vector<int> dist_;
};

// Cartesian product of two full-space schemes embedded in a host state set.
class ProductScheme : public Scheme {
 public:
  ProductScheme(std::shared_ptr<const FlowGraph> host, const std::vector<int>& state_of, std::shared_ptr<Scheme> A,
                std::shared_ptr<Scheme> B, Demand d)
      : Scheme(std::move(host), d), A_(std::move(A)), B_(std::move(B)) {
    nA_ = A_->host().n;
    nB_ = B_->host().n;
    if (static_cast<long long>(nA_) * nB_ != static_cast<long long>(state_of.size()))
      throw FlowError("product: factor sizes do not match the state map");
    local_.assign(host_->n, -1);
    for (size_t k = 0; k < state_of.size(); ++k) {
      const int s = state_of[k];
      if (s < 0 || s >= host_->n || local_[s] >= 0) throw FlowError("product: state map is not injective");
      local_[s] = static_cast<int>(k);
    }
    const FlowGraph& ga = A_->host();
    const FlowGraph& gb = B_->host();
    mapA_.resize(static_cast<size_t>(nB_) * ga.m());
    for (int b = 0; b < nB_; ++b)
      for (int e = 0; e < ga.m(); ++e) {
        const int d = host_->directed(state_of[ga.edges[e].first * nB_ + b], state_of[ga.edges[e].second * nB_ + b]);
        if (d < 0) throw FlowError("product: factor edge has no image");
        mapA_[static_cast<size_t>(b) * ga.m() + e] = d;
      }
    mapB_.resize(static_cast<size_t>(nA_) * gb.m());
    for (int a = 0; a < nA_; ++a)
      for (int e = 0; e < gb.m(); ++e) {
        const int d = host_->directed(state_of[a * nB_ + gb.edges[e].first], state_of[a * nB_ + gb.edges[e].second]);
        if (d < 0) throw FlowError("product: factor edge has no image");
        mapB_[static_cast<size_t>(a) * gb.m() + e] = d;
      }
    mA_.assign(nA_, 0);
    mB_.assign(nB_, 0);
    for (auto [a, m] : A_->measure()) mA_[a] = m;
    for (auto [b, m] : B_->measure()) mB_[b] = m;
    domain_ = state_of;
    std::sort(domain_.begin(), domain_.end());
    for (int s : domain_) measure_.push_back({s, mA_[local_[s] / nB_] * mB_[local_[s] % nB_]});
    depth_ = 1 + std::max(A_->depth(), B_->depth());
  }

  void flow(int s, int t, double c, bool rev, Acc& out) override {
    const int ls = local_[s], lt = local_[t];
    const int a1 = ls / nB_, b1 = ls % nB_, a2 = lt / nB_, b2 = lt % nB_;
    if (a1 != a2) embed_a(A_->flow_vec(a1, a2), b1, c, rev, out);
    if (b1 != b2) embed_b(B_->flow_vec(b1, b2), a2, c, rev, out);
  }

  void hub(int x, double c, bool rev, Acc& out) override {
    const int a = local_[x] / nB_, b = local_[x] % nB_;
    embed_a(A_->hub_vec(a), b, c, rev, out);
    const SparseFlow& hb = B_->hub_vec(b);
    for (int a2 = 0; a2 < nA_; ++a2)
      if (mA_[a2] > 0) embed_b(hb, a2, c * mA_[a2], rev, out);
  }

  void begin_plan(Acc* agg) override {
    agg_ = agg;
    legA_.assign(static_cast<size_t>(nB_) * nA_ * nA_, 0);
    legB_.assign(static_cast<size_t>(nA_) * nB_ * nB_, 0);
    for (int r = 0; r < 2; ++r) {
      hubA_[r].assign(static_cast<size_t>(nA_) * nB_, 0);
      hubB_[r].assign(nB_, 0);
    }
  }

  void plan_flow(int s, int t, double c) override {
    const int ls = local_[s], lt = local_[t];
    const int a1 = ls / nB_, b1 = ls % nB_, a2 = lt / nB_, b2 = lt % nB_;
    if (a1 != a2) legA_[(static_cast<size_t>(b1) * nA_ + a1) * nA_ + a2] += c;
    if (b1 != b2) legB_[(static_cast<size_t>(a2) * nB_ + b1) * nB_ + b2] += c;
  }

  void plan_hub(int x, double c, bool rev) override {
    const int a = local_[x] / nB_, b = local_[x] % nB_;
    hubA_[rev][static_cast<size_t>(b) * nA_ + a] += c;
    hubB_[rev][b] += c;
  }

  // Plans each fiber's factor flows separately, then embeds the fiber aggregate.
  void finalize() override {
    Acc& out = *agg_;
    Acc fa(2 * static_cast<size_t>(A_->host().m())), fb(2 * static_cast<size_t>(B_->host().m()));
    for (int b = 0; b < nB_; ++b) {
      bool any = false;
      A_->begin_plan(&fa);
      for (int a1 = 0; a1 < nA_; ++a1)
        for (int a2 = 0; a2 < nA_; ++a2)
          if (const double c = legA_[(static_cast<size_t>(b) * nA_ + a1) * nA_ + a2]; c != 0)
            A_->plan_flow(a1, a2, c), any = true;
      for (int r = 0; r < 2; ++r)
        for (int a = 0; a < nA_; ++a)
          if (const double c = hubA_[r][static_cast<size_t>(b) * nA_ + a]; c != 0) A_->plan_hub(a, c, r), any = true;
      if (!any) continue;
      A_->finalize();
      embed_a(fa.take(), b, 1.0, false, out);
    }
    for (int a = 0; a < nA_; ++a) {
      bool any = false;
      B_->begin_plan(&fb);
      for (int b1 = 0; b1 < nB_; ++b1)
        for (int b2 = 0; b2 < nB_; ++b2)
          if (const double c = legB_[(static_cast<size_t>(a) * nB_ + b1) * nB_ + b2]; c != 0)
            B_->plan_flow(b1, b2, c), any = true;
      if (mA_[a] > 0)
        for (int r = 0; r < 2; ++r)
          for (int b = 0; b < nB_; ++b)
            if (const double c = hubB_[r][b]; c != 0) B_->plan_hub(b, c * mA_[a], r), any = true;
      if (!any) continue;
      B_->finalize();
      embed_b(fb.take(), a, 1.0, false, out);
    }
  }

  double plan_flow_residual(int s, int t) override {
    const int ls = local_[s], lt = local_[t];
    const int a1 = ls / nB_, b1 = ls % nB_, a2 = lt / nB_, b2 = lt % nB_;
    return (a1 != a2 ? A_->plan_flow_residual(a1, a2) : 0) + (b1 != b2 ? B_->plan_flow_residual(b1, b2) : 0);
  }

  double plan_hub_residual(int x) override {
    return A_->plan_hub_residual(local_[x] / nB_) + B_->plan_hub_residual(local_[x] % nB_);
  }

 private:
  void embed_a(const SparseFlow& f, int b, double c, bool rev, Acc& out) const {
    const size_t base = static_cast<size_t>(b) * A_->host().m();
    const int x = rev ? 1 : 0;
    for (auto [d, v] : f) out.add(mapA_[base + (d >> 1)] ^ (d & 1) ^ x, c * v);
  }
  void embed_b(const SparseFlow& f, int a, double c, bool rev, Acc& out) const {
    const size_t base = static_cast<size_t>(a) * B_->host().m();
    const int x = rev ? 1 : 0;
    for (auto [d, v] : f) out.add(mapB_[base + (d >> 1)] ^ (d & 1) ^ x, c * v);
  }

  std::shared_ptr<Scheme> A_, B_;
  int nA_ = 0, nB_ = 0;
  std::vector<int> local_;       // host state -> a * nB + b
  std::vector<int> mapA_, mapB_;
  std::vector<double> mA_, mB_;
  std::vector<double> legA_, legB_, hubA_[2], hubB_[2];
};

struct Link {
  int r1 = -1, r2 = -1;
  SparseFlow edges;  // oriented r1 -> r2, shares sum to 1; empty for an overlap
  Measure mu1, mu2;  // tails in r1, heads in r2 (equal for an overlap)
  double res = 0;
};

// Routes between regions (classes or subclasses) of one host graph. Region
// paths come from `route`; each step leaves a region from its measure to the
// link tails, crosses the link, and spreads from the heads to the next
// region's measure.
class RegionRouter : public Scheme {
 public:
  using RouteFn = std::function<std::vector<int>(int, int)>;

  RegionRouter(std::shared_ptr<const FlowGraph> host, Demand d, std::vector<std::shared_ptr<Scheme>> regions,
               std::vector<int> region_of, std::vector<Link> links, RouteFn route, bool cover)
      : Scheme(std::move(host), d),
        regions_(std::move(regions)),
        region_of_(std::move(region_of)),
        links_(std::move(links)),
        route_(std::move(route)),
        cover_(cover) {
    K_ = static_cast<int>(regions_.size());
    for (int v = 0; v < host_->n; ++v)
      if (region_of_[v] >= 0) domain_.push_back(v);
    set_uniform_or_pi();
    assigned_.assign(K_, {});
    mA_.assign(K_, 0);
    for (auto [v, m] : measure_) {
      assigned_[region_of_[v]].push_back({v, m});
      mA_[region_of_[v]] += m;
    }
    for (int l = 0; l < static_cast<int>(links_.size()); ++l) {
      auto& L = links_[l];
      link_of_[{L.r1, L.r2}] = l;
      L.res = residual(*host_, L.edges, L.mu1, L.mu2);
    }
    for (const auto& r : regions_) depth_ = std::max(depth_, r->depth());
    routes_.resize(static_cast<size_t>(K_) * K_);
    route_done_.assign(static_cast<size_t>(K_) * K_, 0);
    gm_res_.assign(links_.size() * 2, -1);
    route_res_.assign(static_cast<size_t>(K_) * K_, -1);
    w_res_.assign(K_, -1);
  }

  void flow(int s, int t, double c, bool rev, Acc& out) override {
    const int rs = region_of_[s], rt = region_of_[t];
    if (rs == rt) return regions_[rs]->flow(s, t, c, rev, out);
    add_into(out, regions_[rs]->hub_vec(s), c, rev);
    add_into(out, route_vec(rs, rt), c, rev);
    add_into(out, regions_[rt]->hub_vec(t), c, !rev);
  }

  void hub(int x, double c, bool rev, Acc& out) override {
    const int r = region_of_[x];
    add_into(out, regions_[r]->hub_vec(x), c, rev);
    add_into(out, w_vec(r), c, rev);
  }

  void begin_plan(Acc* agg) override {
    agg_ = agg;
    for (auto& r : regions_) r->begin_plan(agg);
    for (int d = 0; d < 2; ++d) {
      route_mult_[d].assign(static_cast<size_t>(K_) * K_, 0);
      w_mult_[d].assign(K_, 0);
    }
    gm_mult_.assign(links_.size() * 4, 0);
    link_mult_.assign(links_.size() * 2, 0);
  }

  void plan_flow(int s, int t, double c) override {
    const int rs = region_of_[s], rt = region_of_[t];
    if (rs == rt) return regions_[rs]->plan_flow(s, t, c);
    regions_[rs]->plan_hub(s, c, false);
    route_mult_[0][static_cast<size_t>(rs) * K_ + rt] += c;
    regions_[rt]->plan_hub(t, c, true);
  }

  void plan_hub(int x, double c, bool rev) override {
    regions_[region_of_[x]]->plan_hub(x, c, rev);
    w_mult_[rev][region_of_[x]] += c;
  }

  void finalize() override {
    for (int d = 0; d < 2; ++d)
      for (int r = 0; r < K_; ++r) {
        const double c = w_mult_[d][r];
        if (c == 0) continue;
        for (int r2 = 0; r2 < K_; ++r2)
          if (r2 != r && mA_[r2] > 0) route_mult_[d][static_cast<size_t>(r) * K_ + r2] += c * mA_[r2];
        if (cover_)
          for (int r2 = 0; r2 < K_; ++r2)
            for (auto [t, m] : assigned_[r2]) regions_[r2]->plan_hub(t, c * m, !d);
      }
    for (int d = 0; d < 2; ++d)
      for (int r = 0; r < K_; ++r)
        for (int r2 = 0; r2 < K_; ++r2) {
          const double c = route_mult_[d][static_cast<size_t>(r) * K_ + r2];
          if (c == 0) continue;
          for (auto [l, fwd] : steps(r, r2)) {
            const int out_side = fwd ? 0 : 1;
            gm_mult_[l * 4 + out_side * 2 + (1 ^ d)] += c;
            link_mult_[l * 2 + ((fwd ? 0 : 1) ^ d)] += c;
            gm_mult_[l * 4 + (1 - out_side) * 2 + d] += c;
          }
        }
    for (size_t l = 0; l < links_.size(); ++l)
      for (int side = 0; side < 2; ++side)
        for (int rv = 0; rv < 2; ++rv) {
          const double c = gm_mult_[l * 4 + side * 2 + rv];
          if (c == 0) continue;
          const auto& L = links_[l];
          auto& reg = regions_[side ? L.r2 : L.r1];
          for (auto [y, w] : side ? L.mu2 : L.mu1) reg->plan_hub(y, c * w, rv);
        }
    for (size_t l = 0; l < links_.size(); ++l)
      for (int rv = 0; rv < 2; ++rv)
        if (const double c = link_mult_[l * 2 + rv]; c != 0) add_into(*agg_, links_[l].edges, c, rv);
    for (auto& r : regions_) r->finalize();
  }

  double plan_flow_residual(int s, int t) override {
    const int rs = region_of_[s], rt = region_of_[t];
    if (rs == rt) return regions_[rs]->plan_flow_residual(s, t);
    return regions_[rs]->plan_hub_residual(s) + route_res(rs, rt) + regions_[rt]->plan_hub_residual(t);
  }

  double plan_hub_residual(int x) override {
    const int r = region_of_[x];
    if (w_res_[r] < 0) {
      double w = 0;
      for (int r2 = 0; r2 < K_; ++r2)
        if (r2 != r) w += mA_[r2] * route_res(r, r2);
      if (cover_)
        for (int r2 = 0; r2 < K_; ++r2)
          for (auto [t, m] : assigned_[r2]) w += m * regions_[r2]->plan_hub_residual(t);
      w_res_[r] = w;
    }
    return regions_[r]->plan_hub_residual(x) + w_res_[r];
  }

 private:
  std::vector<std::pair<int, bool>> steps(int r, int r2) {
    std::vector<int> path = route_(r, r2);
    if (path.empty() || path.front() != r || path.back() != r2) throw FlowError("router: no region path");
    std::vector<std::pair<int, bool>> out;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      const int x = path[i], y = path[i + 1];
      auto it = link_of_.find({std::min(x, y), std::max(x, y)});
      if (it == link_of_.end()) throw FlowError("router: consecutive regions are not linked");
      out.push_back({it->second, links_[it->second].r1 == x});
    }
    return out;
  }

  const SparseFlow& gm_vec(int l, int side) {
    auto key = std::make_pair(l, side);
    auto it = gm_cache_.find(key);
    if (it != gm_cache_.end()) return it->second;
    Acc a(2 * static_cast<size_t>(host_->m()));
    const auto& L = links_[l];
    auto& reg = regions_[side ? L.r2 : L.r1];
    for (auto [y, w] : side ? L.mu2 : L.mu1) add_into(a, reg->hub_vec(y), w, false);
    return gm_cache_[key] = a.take();
  }

  const SparseFlow& route_vec(int r, int r2) {
    const size_t k = static_cast<size_t>(r) * K_ + r2;
    if (!route_done_[k]) {
      Acc tmp(2 * static_cast<size_t>(host_->m()));
      for (auto [l, fwd] : steps(r, r2)) {
        const int out_side = fwd ? 0 : 1;
        add_into(tmp, gm_vec(l, out_side), 1.0, true);
        add_into(tmp, links_[l].edges, 1.0, !fwd);
        add_into(tmp, gm_vec(l, 1 - out_side), 1.0, false);
      }
      routes_[k] = tmp.take();
      route_done_[k] = 1;
    }
    return routes_[k];
  }

  const SparseFlow& w_vec(int r) {
    auto it = w_cache_.find(r);
    if (it != w_cache_.end()) return it->second;
    Acc tmp(2 * static_cast<size_t>(host_->m()));
    for (int r2 = 0; r2 < K_; ++r2)
      if (r2 != r && mA_[r2] > 0) add_into(tmp, route_vec(r, r2), mA_[r2], false);
    if (cover_)
      for (int r2 = 0; r2 < K_; ++r2)
        for (auto [t, m] : assigned_[r2]) add_into(tmp, regions_[r2]->hub_vec(t), m, true);
    return w_cache_[r] = tmp.take();
  }

  double gm_res(int l, int side) {
    double& g = gm_res_[l * 2 + side];
    if (g < 0) {
      g = 0;
      const auto& L = links_[l];
      auto& reg = regions_[side ? L.r2 : L.r1];
      for (auto [y, w] : side ? L.mu2 : L.mu1) g += w * reg->plan_hub_residual(y);
    }
    return g;
  }

  double route_res(int r, int r2) {
    double& x = route_res_[static_cast<size_t>(r) * K_ + r2];
    if (x < 0) {
      x = 0;
      for (auto [l, fwd] : steps(r, r2)) x += gm_res(l, 0) + gm_res(l, 1) + links_[l].res;
    }
    return x;
  }

  std::vector<std::shared_ptr<Scheme>> regions_;
  std::vector<int> region_of_;
  std::vector<Link> links_;
  std::map<std::pair<int, int>, int> link_of_;
  RouteFn route_;
  bool cover_;
  int K_ = 0;
  std::vector<Measure> assigned_;
  std::vector<double> mA_;
  std::vector<SparseFlow> routes_;
  std::vector<char> route_done_;
  std::map<std::pair<int, int>, SparseFlow> gm_cache_;
  std::map<int, SparseFlow> w_cache_;
  std::vector<double> route_mult_[2], w_mult_[2], gm_mult_, link_mult_;
  std::vector<double> gm_res_, route_res_, w_res_;
};

Measure normalized(const FlowGraph& g, const std::vector<int>& vs, Demand d) {
  Measure m;
  double z = 0;
  for (int v : vs) z += d == Demand::uniform ? 1.0 : g.pi[v];
  for (int v : vs) m.push_back({v, (d == Demand::uniform ? 1.0 : g.pi[v]) / z});
  return m;
}

// Edge link from region r1 to r2 over the given undirected edges.
Link edge_link(const FlowGraph& g, int r1, int r2, const std::vector<int>& es, const std::vector<int>& region_side,
               Demand d) {
  Link L;
  L.r1 = r1;
  L.r2 = r2;
  double z = 0;
  for (int e : es) z += d == Demand::uniform ? 1.0 : g.Q[e];
  std::map<int, double> t, h;
  for (int e : es) {
    const double share = (d == Demand::uniform ? 1.0 : g.Q[e]) / z;
    const int dd = region_side[g.edges[e].first] == r1 ? 2 * e : 2 * e + 1;
    L.edges.push_back({dd, share});
    t[g.tail(dd)] += share;
    h[g.head(dd)] += share;
  }
  std::sort(L.edges.begin(), L.edges.end());
  L.mu1.assign(t.begin(), t.end());
  L.mu2.assign(h.begin(), h.end());
  return L;
}

std::vector<int> bfs_path(const std::vector<std::vector<int>>& adj, int a, int b) {
  std::vector<int> par(adj.size(), -2);
  std::vector<int> q{a};
  par[a] = -1;
  for (size_t i = 0; i < q.size() && par[b] == -2; ++i)
    for (int w : adj[q[i]])
      if (par[w] == -2) par[w] = q[i], q.push_back(w);
  if (par[b] == -2) return {};
  std::vector<int> path;
  for (int v = b; v != -1; v = par[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

bool connected(const std::vector<std::vector<int>>& adj) {
  if (adj.empty()) return true;
  std::vector<char> seen(adj.size(), 0);
  std::vector<int> q{0};
  seen[0] = 1;
  for (size_t i = 0; i < q.size(); ++i)
    for (int w : adj[q[i]])
      if (!seen[w]) seen[w] = 1, q.push_back(w);
  return q.size() == adj.size();
}

struct Builder {
  Demand demand;
  double floor;
  std::map<std::string, std::shared_ptr<Scheme>> cache;

  std::shared_ptr<Scheme> factor(StateSpace sp, long long parent_size) {
    std::ostringstream key;
    key << chain_name(sp.params.kind) << ' ' << sp.params.lambda << ' ' << sp.params.q << ' '
        << demand_name(demand) << '\n'
        << format_graph(sp.graph);
    auto it = cache.find(key.str());
    if (it != cache.end()) return it->second;
    auto host = std::make_shared<const FlowGraph>(flow_graph(sp));
    std::shared_ptr<Scheme> s;
    const long long size = sp.graph.n() + sp.graph.m();
    if (sp.size() <= 2 || sp.graph.n() <= 1 || size >= parent_size) {
      s = std::make_shared<PathScheme>(host, demand);
    } else {
      const Separator sep = find_balanced_separator(sp.graph, compute_decomposition(sp.graph));
      const ClassPartition part = partition_by_trace(sp, sep);
      const Variant v = default_variant(sp.params.kind);
      std::optional<TraceOrder> order;
      if (v == Variant::hier || v == Variant::relaxed_hier) order = build_trace_order(sp, part);
      s = classes(host, sp, part, v, order ? &*order : nullptr, nullptr);
    }
    cache[key.str()] = s;
    return s;
  }

  std::shared_ptr<Scheme> product(const std::shared_ptr<const FlowGraph>& host, const StateSpace& sp,
                                  ProductCertificate cert) {
    if (!cert.ok()) throw FlowError("class " + cert.label + " is not a product: " + cert.witness);
    const long long size = sp.graph.n() + sp.graph.m();
    auto A = factor(std::move(cert.space_a), size);
    auto B = factor(std::move(cert.space_b), size);
    return std::make_shared<ProductScheme>(host, cert.state_of, A, B, demand);
  }

  std::shared_ptr<Scheme> cover_scheme(const std::shared_ptr<const FlowGraph>& host, const StateSpace& sp,
                                       SubclassCover cover) {
    if (cover.subclasses.empty()) throw FlowError("empty subclass cover");
    if (!cover.linked) throw FlowError("subclass chain disconnected");
    if (!cover.overlaps.empty() && cover.min_overlap_fraction < floor)
      throw FlowError("subclass overlap " + std::to_string(cover.min_overlap_fraction) + " below floor");
    const int k = static_cast<int>(cover.subclasses.size());
    std::vector<std::vector<int>> members;
    for (const auto& sc : cover.subclasses) members.push_back(sc.cert.members);
    std::vector<std::shared_ptr<Scheme>> regions;
    for (auto& sc : cover.subclasses) regions.push_back(product(host, sp, std::move(sc.cert)));
    if (k == 1) return regions[0];
    std::vector<int> region_of(host->n, -1), first_side(host->n, -1);
    for (int i = k - 1; i >= 0; --i)
      for (int s : members[i]) region_of[s] = i;
    std::vector<Link> links;
    std::vector<std::vector<int>> adj(k);
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        std::vector<int> shared;
        std::set_intersection(members[i].begin(), members[i].end(), members[j].begin(), members[j].end(),
                              std::back_inserter(shared));
        Link L;
        if (!shared.empty()) {
          L.r1 = i;
          L.r2 = j;
          L.mu1 = L.mu2 = normalized(*host, shared, demand);
        } else {
          std::vector<char> inj(host->n, 0);
          for (int s : members[j]) inj[s] = 1;
          std::vector<int> es;
          std::fill(first_side.begin(), first_side.end(), -1);
          for (int s : members[i]) {
            first_side[s] = i;
            for (size_t q = 0; q < host->adj[s].size(); ++q)
              if (inj[host->adj[s][q]]) es.push_back(host->adj_edge[s][q]);
          }
          if (es.empty()) continue;
          for (int s : members[j]) first_side[s] = j;
          std::sort(es.begin(), es.end());
          L = edge_link(*host, i, j, es, first_side, demand);
        }
        links.push_back(std::move(L));
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    if (!connected(adj)) throw FlowError("subclass chain disconnected");
    auto route = [adj](int a, int b) { return bfs_path(adj, a, b); };
    return std::make_shared<RegionRouter>(host, demand, std::move(regions), std::move(region_of), std::move(links),
                                          route, true);
  }

  std::shared_ptr<Scheme> classes(const std::shared_ptr<const FlowGraph>& host, const StateSpace& sp,
                                  const ClassPartition& part, Variant v, const TraceOrder* order,
                                  const std::vector<SubclassCover>* covers) {
    const int K = part.size();
    const bool relaxed = v == Variant::relaxed_hier || v == Variant::relaxed_nonhier;
    if (relaxed != needs_subclasses(sp.params.kind))
      throw FlowError(std::string("variant ") + variant_name(v) + " does not fit chain " + chain_name(sp.params.kind));
    if (v == Variant::relaxed_nonhier) {
      // Subclasses of different classes act as overlapping regions, so a class
      // whose own subclasses are not linked can route through its neighbors.
      std::vector<SubclassCover> all;
      for (int c = 0; c < K; ++c) all.push_back(covers ? (*covers)[c] : subclass_decompose(sp, part, c));
      return cover_scheme(host, sp, merge_covers(sp, all));
    }
    std::vector<std::shared_ptr<Scheme>> regions;
    for (int c = 0; c < K; ++c) {
      if (relaxed) regions.push_back(cover_scheme(host, sp, covers ? (*covers)[c] : subclass_decompose(sp, part, c)));
      else regions.push_back(product(host, sp, certify_cartesian_product(sp, part, c)));
    }
    if (K == 1) return regions[0];
    std::vector<Link> links;
    for (const auto& [key, es] : part.boundary) links.push_back(edge_link(*host, key.first, key.second, es, part.class_of, demand));
    RegionRouter::RouteFn route;
    if (v == Variant::hier || v == Variant::relaxed_hier) {
      if (!order || !order->ok()) throw FlowError("order violation: " + (order ? order->witness : std::string("no order")));
      route = [traces = part.traces, upward = order->upward, adj = part.class_adj](int a, int b) {
        return order_path(traces, upward, adj, a, b);
      };
    } else {
      if (!connected(part.class_adj)) throw FlowError("class adjacency graph disconnected");
      route = [adj = part.class_adj](int a, int b) { return bfs_path(adj, a, b); };
    }
    return std::make_shared<RegionRouter>(host, demand, std::move(regions), part.class_of, std::move(links), route,
                                          false);
  }

  // Ascend from a to the least common ancestor, then descend to b, one site at a time.
  static std::vector<int> order_path(const std::vector<State>& traces, bool upward,
                                     const std::vector<std::vector<int>>& adj, int a, int b) {
    auto find = [&](const State& t) {
      auto it = std::lower_bound(traces.begin(), traces.end(), t);
      if (it == traces.end() || *it != t) throw FlowError("order violation: missing intermediate class");
      return static_cast<int>(it - traces.begin());
    };
    const State& ta = traces[a];
    const State& tb = traces[b];
    State lca(ta.size());
    for (size_t i = 0; i < ta.size(); ++i)
      lca[i] = upward ? std::max(ta[i], tb[i]) : (ta[i] == tb[i] ? ta[i] : 0);
    std::vector<int> path{a};
    State cur = ta;
    for (size_t i = 0; i < cur.size(); ++i)
      if (cur[i] != lca[i]) cur[i] = lca[i], path.push_back(find(cur));
    for (size_t i = 0; i < cur.size(); ++i)
      if (cur[i] != tb[i]) cur[i] = tb[i], path.push_back(find(cur));
    for (size_t i = 0; i + 1 < path.size(); ++i)
      if (!std::binary_search(adj[path[i]].begin(), adj[path[i]].end(), path[i + 1]))
        throw FlowError("order violation: parent and child classes are not adjacent");
    return path;
  }
};

Flow aggregate(std::shared_ptr<const FlowGraph> g, std::shared_ptr<Scheme> top, Demand d, const FlowOptions& o) {
  if (g->n > o.state_cap)
    throw FlowError("flow: " + std::to_string(g->n) + " states exceed the cap " + std::to_string(o.state_cap));
  Flow f;
  f.graph = g;
  f.demand = d;
  f.scheme = top;
  f.depth = top->depth();
  const int n = g->n;
  Acc agg(2 * static_cast<size_t>(g->m()));
  top->begin_plan(&agg);
  auto w = [&](int s) { return d == Demand::uniform ? 1.0 : g->pi[s]; };
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      if (s == t) continue;
      const double c = w(s) * w(t);
      top->plan_flow(s, t, c);
      f.demand_total += c;
      ++f.commodities;
    }
  top->finalize();
  f.load = agg.v;
  std::vector<double> net(n, 0);
  for (int e = 0; e < g->m(); ++e) {
    const double x = f.load[2 * e] - f.load[2 * e + 1];
    net[g->edges[e].first] += x;
    net[g->edges[e].second] -= x;
  }
  for (double x : net) f.aggregate_divergence = std::max(f.aggregate_divergence, std::abs(x));
  if (n <= o.exact_cap) {
    f.exact = true;
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t)
        if (s != t) f.max_conservation_error = std::max(f.max_conservation_error, top->plan_flow_residual(s, t));
  }
  if (n <= o.materialize_cap) {
    std::vector<double> sum(f.load.size(), 0);
    Acc a(f.load.size());
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t) {
        if (s == t) continue;
        top->flow(s, t, 1.0, false, a);
        SparseFlow v = a.take();
        f.max_materialized_error = std::max(f.max_materialized_error, conservation_error(*g, v, s, t));
        for (auto [e, x] : v) sum[e] += w(s) * w(t) * x;
        ++f.materialized;
      }
    for (size_t e = 0; e < sum.size(); ++e) f.aggregate_mismatch = std::max(f.aggregate_mismatch, std::abs(sum[e] - f.load[e]));
  }
  return f;
}

Flow build_with(const StateSpace& sp, const ClassPartition& part, Variant v, const TraceOrder* order,
                const std::vector<SubclassCover>* covers, const FlowOptions& o, const char* name) {
  if (sp.size() < 1) throw FlowError("empty state space");
  if (o.demand == Demand::weighted && !(sp.params.lambda > 0)) throw FlowError("lambda must be positive");
  Builder b{o.demand, o.overlap_floor, {}};
  auto host = std::make_shared<const FlowGraph>(flow_graph(sp));
  auto top = b.classes(host, sp, part, v, order, covers);
  Flow f = aggregate(host, top, o.demand, o);
  f.construction = name;
  f.variant = v;
  f.separator = part.sep.X;
  return f;
}

}  // namespace

bool Flow::valid(double tol) const {
  if (aggregate_divergence > tol * std::max(1.0, demand_total)) return false;
  if (exact && max_conservation_error > tol) return false;
  if (materialized && (max_materialized_error > tol || aggregate_mismatch > tol * std::max(1.0, demand_total)))
    return false;
  return true;
}

SparseFlow commodity_flow(const Flow& f, int s, int t) {
  Acc a(2 * static_cast<size_t>(f.graph->m()));
  if (s != t) f.scheme->flow(s, t, 1.0, false, a);
  return a.take();
}

double congestion(const Flow& f) {
  double worst = 0;
  for (size_t d = 0; d < f.load.size(); ++d) {
    if (f.demand == Demand::uniform) {
      worst = std::max(worst, f.load[d]);
      continue;
    }
    const double q = f.graph->Q[d >> 1];
    if (q <= 0) {
      if (f.load[d] > 0) throw FlowError("zero-capacity edge carries load");
      continue;
    }
    worst = std::max(worst, f.load[d] / q);
  }
  return worst;
}

Flow shortest_path_flow(const FlowGraph& g, Demand d, const FlowOptions& o) {
  auto host = std::make_shared<const FlowGraph>(g);
  Flow f = aggregate(host, std::make_shared<PathScheme>(host, d), d, o);
  f.construction = "shortest_path";
  return f;
}

Flow product_flow(const Flow& H, const Flow& J, const FlowOptions& o) {
  if (H.demand != J.demand) throw FlowError("product: factor demand models differ");
  if (!H.scheme || !J.scheme) throw FlowError("product: factor flow has no router");
  const FlowGraph& gh = *H.graph;
  const FlowGraph& gj = *J.graph;
  const int nh = gh.n, nj = gj.n;
  if (H.scheme->domain().size() != static_cast<size_t>(nh) || J.scheme->domain().size() != static_cast<size_t>(nj))
    throw FlowError("product: factor flows do not cover their graphs");
  std::vector<std::pair<int, int>> edges;
  std::vector<double> Q;
  for (int j = 0; j < nj; ++j)
    for (int e = 0; e < gh.m(); ++e) {
      edges.push_back({gh.edges[e].first * nj + j, gh.edges[e].second * nj + j});
      Q.push_back(gj.pi[j] * gh.Q[e]);
    }
  for (int h = 0; h < nh; ++h)
    for (int e = 0; e < gj.m(); ++e) {
      edges.push_back({h * nj + gj.edges[e].first, h * nj + gj.edges[e].second});
      Q.push_back(gh.pi[h] * gj.Q[e]);
    }
  std::vector<double> pi(static_cast<size_t>(nh) * nj);
  std::vector<int> state_of(pi.size());
  for (int h = 0; h < nh; ++h)
    for (int j = 0; j < nj; ++j) pi[h * nj + j] = gh.pi[h] * gj.pi[j], state_of[h * nj + j] = h * nj + j;
  auto host = std::make_shared<const FlowGraph>(make_flow_graph(nh * nj, std::move(edges), std::move(pi), std::move(Q)));
  auto top = std::make_shared<ProductScheme>(host, state_of, H.scheme, J.scheme, H.demand);
  Flow f = aggregate(host, top, H.demand, o);
  f.construction = "product";
  return f;
}

Flow build_flow_nonhier(const StateSpace& sp, const ClassPartition& part, const FlowOptions& o) {
  if (needs_subclasses(sp.params.kind)) throw FlowError("chain needs subclasses; use the relaxed construction");
  return build_with(sp, part, Variant::nonhier, nullptr, nullptr, o, "nonhier");
}

Flow build_flow_hier(const StateSpace& sp, const ClassPartition& part, const TraceOrder& order, const FlowOptions& o) {
  if (needs_subclasses(sp.params.kind)) throw FlowError("chain needs subclasses; use the relaxed construction");
  return build_with(sp, part, Variant::hier, &order, nullptr, o, "hier");
}

Flow build_flow_relaxed(const StateSpace& sp, const ClassPartition& part, const std::vector<SubclassCover>& covers,
                        Variant v, const FlowOptions& o) {
  if (v != Variant::relaxed_hier && v != Variant::relaxed_nonhier) throw FlowError("relaxed flow needs a relaxed variant");
  if (!needs_subclasses(sp.params.kind)) throw FlowError("chain has product classes; use hier or nonhier");
  if (static_cast<int>(covers.size()) != part.size()) throw FlowError("one subclass cover per class required");
  std::optional<TraceOrder> order;
  if (v == Variant::relaxed_hier) order = build_trace_order(sp, part);
  return build_with(sp, part, v, order ? &*order : nullptr, &covers, o, variant_name(v));
}

namespace {

Flow build_on(const StateSpace& sp, const std::vector<int>& X, Variant v, const FlowOptions& o) {
  const bool relaxed = v == Variant::relaxed_hier || v == Variant::relaxed_nonhier;
  if (relaxed != needs_subclasses(sp.params.kind))
    throw FlowError(std::string("variant ") + variant_name(v) + " does not fit chain " + chain_name(sp.params.kind));
  const ClassPartition part = partition_by_trace(sp, X);
  switch (v) {
    case Variant::nonhier:
      return build_flow_nonhier(sp, part, o);
    case Variant::hier:
      return build_flow_hier(sp, part, build_trace_order(sp, part), o);
    default: {
      std::vector<SubclassCover> covers;
      for (int c = 0; c < part.size(); ++c) covers.push_back(subclass_decompose(sp, part, c));
      return build_flow_relaxed(sp, part, covers, v, o);
    }
  }
}

}  // namespace

Flow build_flow(const StateSpace& sp, Variant v, const FlowOptions& o) {
  const Separator sep = find_balanced_separator(sp.graph, compute_decomposition(sp.graph));
  return build_on(sp, sep.X, v, o);
}

Flow build_flow(const StateSpace& sp, const FlowOptions& o) { return build_flow(sp, default_variant(sp.params.kind), o); }

Flow reweight_flow(const Flow& f, const StateSpace& sp, const FlowOptions& o) {
  if (!(sp.params.lambda > 0)) throw FlowError("lambda must be positive");
  if (sp.size() != f.graph->n) throw FlowError("reweight: state space does not match the flow");
  FlowOptions w = o;
  w.demand = Demand::weighted;
  Flow out = build_on(sp, f.separator, f.variant, w);
  out.construction = "reweighted_" + f.construction;
  return out;
}

std::string dump_flow(const Flow& f) {
  if (!f.exact) throw FlowError("dump_flow: flow was built above the exact cap");
  std::ostringstream os;
  os.precision(17);
  const int n = f.graph->n;
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      if (s == t) continue;
      os << s << ' ' << t;
      for (auto [d, x] : commodity_flow(f, s, t)) os << ' ' << d << ':' << x;
      os << '\n';
    }
  return os.str();
}

}  // namespace gd

namespace gd {

WeightFactorCheck weight_factorization(const StateSpace& sp, const ProductCertificate& cert) {
  if (!cert.ok()) throw FlowError("weight_factorization: certificate " + cert.label + " did not pass");
  WeightFactorCheck w;
  auto rel = [](double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s > 0 ? std::abs(a - b) / s : 0.0;
  };
  double pc = 0;
  for (int s : cert.members) pc += sp.pi[s];
  const StateSpace& A = cert.space_a;
  const StateSpace& B = cert.space_b;
  const int nb = B.size();
  for (size_t i = 0; i < cert.members.size(); ++i) {
    const auto [a, b] = cert.pair_of[i];
    w.vertex_residual = std::max(w.vertex_residual, rel(sp.pi[cert.members[i]], A.pi[a] * B.pi[b] * pc));
    ++w.vertices;
  }
  if (is_maximal_chain(sp.params.kind)) return w;
  w.edges_checked = true;
  const double sg = static_cast<double>(site_normalizer(sp.graph, sp.params));
  const double sa = A.size() ? static_cast<double>(site_normalizer(A.graph, A.params)) : 0;
  const double sb = B.size() ? static_cast<double>(site_normalizer(B.graph, B.params)) : 0;
  auto q_g = [&](int s, int t) {
    const auto& adj = sp.adj[s];
    const auto it = std::lower_bound(adj.begin(), adj.end(), t);
    if (it == adj.end() || *it != t) throw FlowError("weight_factorization: product edge missing in the space");
    return sp.pi[s] * sp.adj_rate[s][it - adj.begin()] / sg;
  };
  for (size_t i = 0; i < cert.members.size(); ++i) {
    const int s = cert.members[i];
    const auto [a, b] = cert.pair_of[i];
    for (size_t k = 0; k < A.adj[a].size(); ++k) {
      const int t = cert.state_of[static_cast<size_t>(A.adj[a][k]) * nb + b];
      const double qc = B.pi[b] * (A.pi[a] * A.adj_rate[a][k] / sa) * sa / (sa + sb);
      w.edge_residual = std::max(w.edge_residual, rel(q_g(s, t), qc * pc * (sa + sb) / sg));
      ++w.edges;
    }
    for (size_t k = 0; k < B.adj[b].size(); ++k) {
      const int t = cert.state_of[static_cast<size_t>(a) * nb + B.adj[b][k]];
      const double qc = A.pi[a] * (B.pi[b] * B.adj_rate[b][k] / sb) * sb / (sa + sb);
      w.edge_residual = std::max(w.edge_residual, rel(q_g(s, t), qc * pc * (sa + sb) / sg));
      ++w.edges;
    }
  }
  return w;
}

}  // namespace gd
