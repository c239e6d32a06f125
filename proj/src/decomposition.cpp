#include "gd/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gd {

std::vector<std::vector<int>> components(const Graph& g, const std::vector<char>& keep) {
  std::vector<std::vector<int>> out;
  std::vector<char> seen(g.n(), 0);
  for (int s = 0; s < g.n(); ++s) {
    if (!keep[s] || seen[s]) continue;
    std::vector<int> comp{s};
    seen[s] = 1;
    for (size_t i = 0; i < comp.size(); ++i)
      for (int w : g.neighbors(comp[i]))
        if (keep[w] && !seen[w]) {
          seen[w] = 1;
          comp.push_back(w);
        }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

DecompositionReport validate_decomposition(const Graph& g, const TreeDecomposition& td) {
  DecompositionReport r;
  const int k = static_cast<int>(td.bags.size());
  // tree shape
  if (k == 0) {
    r.is_tree = false;
    r.tree_problem = "no bags";
  } else if (static_cast<int>(td.tree_edges.size()) != k - 1) {
    r.is_tree = false;
    r.tree_problem = "expected " + std::to_string(k - 1) + " tree edges";
  } else {
    std::vector<int> parent(k);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (auto [a, b] : td.tree_edges) {
      if (a < 0 || b < 0 || a >= k || b >= k) {
        r.is_tree = false;
        r.tree_problem = "tree edge index out of range";
        break;
      }
      if (find(a) == find(b)) {
        r.is_tree = false;
        r.tree_problem = "tree edges contain a cycle at (" + std::to_string(a) + "," + std::to_string(b) + ")";
        break;
      }
      parent[find(a)] = find(b);
    }
  }
  std::vector<std::vector<int>> holding(g.n());
  for (int i = 0; i < k; ++i)
    for (int v : td.bags[i])
      if (v >= 0 && v < g.n()) holding[v].push_back(i);
  for (int v = 0; v < g.n() && r.vertex_cover; ++v)
    if (holding[v].empty()) {
      r.vertex_cover = false;
      r.missing_vertex = v;
    }
  for (auto [u, v] : g.edges()) {
    bool found = false;
    for (int i : holding[u])
      if (std::binary_search(holding[v].begin(), holding[v].end(), i)) {
        found = true;
        break;
      }
    if (!found) {
      r.edge_cover = false;
      r.missing_edge = std::make_pair(u, v);
      break;
    }
  }
  if (r.is_tree) {
    std::vector<std::vector<int>> tadj(k);
    for (auto [a, b] : td.tree_edges) {
      tadj[a].push_back(b);
      tadj[b].push_back(a);
    }
    std::vector<char> has(k, 0), seen(k, 0);
    for (int v = 0; v < g.n() && r.connected; ++v) {
      if (holding[v].empty()) continue;
      for (int i : holding[v]) has[i] = 1, seen[i] = 0;
      std::vector<int> stack{holding[v][0]};
      seen[holding[v][0]] = 1;
      size_t reached = 0;
      while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        ++reached;
        for (int y : tadj[x])
          if (has[y] && !seen[y]) {
            seen[y] = 1;
            stack.push_back(y);
          }
      }
      if (reached != holding[v].size()) {
        r.connected = false;
        r.disconnected_vertex = v;
      }
      for (int i : holding[v]) has[i] = 0;
    }
  }
  return r;
}

int decomposition_width(const TreeDecomposition& td) {
  if (td.bags.empty()) throw std::invalid_argument("empty decomposition");
  size_t w = 0;
  for (const auto& b : td.bags) w = std::max(w, b.size());
  return static_cast<int>(w) - 1;
}

TreeDecomposition compute_decomposition(const Graph& g) {
  const int n = g.n();
  TreeDecomposition td;
  if (n == 0) {
    td.bags.push_back({});
    return td;
  }
  std::vector<std::set<int>> adj(n);
  for (auto [u, v] : g.edges()) {
    adj[u].insert(v);
    adj[v].insert(u);
  }
  std::vector<char> gone(n, 0);
  std::vector<int> order, pos(n);
  std::vector<std::vector<int>> later(n);  // neighbors at elimination time
  for (int step = 0; step < n; ++step) {
    int best = -1;
    long long best_fill = 0;
    size_t best_deg = 0;
    for (int v = 0; v < n; ++v) {
      if (gone[v]) continue;
      long long fill = 0;
      for (auto a = adj[v].begin(); a != adj[v].end(); ++a)
        for (auto b = std::next(a); b != adj[v].end(); ++b)
          if (!adj[*a].count(*b)) ++fill;
      if (best < 0 || fill < best_fill || (fill == best_fill && adj[v].size() < best_deg)) {
        best = v;
        best_fill = fill;
        best_deg = adj[v].size();
      }
    }
    const int v = best;
    later[v].assign(adj[v].begin(), adj[v].end());
    for (int a : later[v])
      for (int b : later[v])
        if (a != b) adj[a].insert(b);
    for (int a : later[v]) adj[a].erase(v);
    adj[v].clear();
    gone[v] = 1;
    pos[v] = step;
    order.push_back(v);
  }
  // bag i belongs to order[i]
  std::vector<std::set<int>> bags(n);
  std::vector<std::set<int>> tadj(n);
  int first_root = -1;
  for (int i = 0; i < n; ++i) {
    const int v = order[i];
    bags[i].insert(v);
    bags[i].insert(later[v].begin(), later[v].end());
    if (later[v].empty()) {
      if (first_root < 0) {
        first_root = i;
      } else {
        tadj[i].insert(first_root);
        tadj[first_root].insert(i);
      }
      continue;
    }
    int p = n;
    for (int w : later[v]) p = std::min(p, pos[w]);
    tadj[i].insert(p);
    tadj[p].insert(i);
  }
  std::vector<char> alive(n, 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n && !changed; ++i) {
      if (!alive[i]) continue;
      for (int j : tadj[i]) {
        if (!std::includes(bags[j].begin(), bags[j].end(), bags[i].begin(), bags[i].end())) continue;
        for (int x : tadj[i])
          if (x != j) {
            tadj[x].erase(i);
            tadj[x].insert(j);
            tadj[j].insert(x);
          }
        tadj[j].erase(i);
        tadj[i].clear();
        alive[i] = 0;
        changed = true;
        break;
      }
    }
  }
  std::vector<int> id(n, -1);
  for (int i = 0; i < n; ++i)
    if (alive[i]) {
      id[i] = static_cast<int>(td.bags.size());
      td.bags.emplace_back(bags[i].begin(), bags[i].end());
    }
  for (int i = 0; i < n; ++i)
    if (alive[i])
      for (int j : tadj[i])
        if (i < j) td.tree_edges.push_back({id[i], id[j]});
  std::sort(td.tree_edges.begin(), td.tree_edges.end());
  return td;
}

std::string format_decomposition(const TreeDecomposition& td) {
  std::ostringstream os;
  os << td.bags.size() << '\n';
  for (const auto& b : td.bags) {
    for (size_t i = 0; i < b.size(); ++i) os << (i ? " " : "") << b[i];
    os << '\n';
  }
  for (auto [a, b] : td.tree_edges) os << a << ' ' << b << '\n';
  return os.str();
}

TreeDecomposition parse_decomposition(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  auto next = [&](const char* what) {
    if (!std::getline(is, line)) throw std::invalid_argument(std::string("decomposition: missing ") + what);
    return std::istringstream(line);
  };
  int k;
  if (!(next("header") >> k) || k < 0) throw std::invalid_argument("decomposition: bad header");
  TreeDecomposition td;
  for (int i = 0; i < k; ++i) {
    auto ls = next("bag");
    std::vector<int> bag;
    int v;
    while (ls >> v) bag.push_back(v);
    std::sort(bag.begin(), bag.end());
    td.bags.push_back(std::move(bag));
  }
  for (int i = 0; i + 1 < k; ++i) {
    auto ls = next("tree edge");
    int a, b;
    if (!(ls >> a >> b)) throw std::invalid_argument("decomposition: bad tree edge");
    td.tree_edges.push_back({a, b});
  }
  return td;
}

namespace {

struct Split {
  std::vector<int> A, B;
  int max_component = 0;
};

Split split_without(const Graph& g, const std::vector<int>& X) {
  std::vector<char> keep(g.n(), 1);
  for (int x : X) keep[x] = 0;
  auto comps = components(g, keep);
  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  Split s;
  for (const auto& c : comps) {
    s.max_component = std::max(s.max_component, static_cast<int>(c.size()));
    auto& side = s.A.size() <= s.B.size() ? s.A : s.B;
    side.insert(side.end(), c.begin(), c.end());
  }
  std::sort(s.A.begin(), s.A.end());
  std::sort(s.B.begin(), s.B.end());
  return s;
}

}  // namespace

Separator find_balanced_separator(const Graph& g, const TreeDecomposition& td) {
  std::vector<std::vector<int>> cands{{}};
  for (const auto& b : td.bags) cands.push_back(b);
  for (auto [a, b] : td.tree_edges) {
    std::vector<int> inter;
    std::set_intersection(td.bags[a].begin(), td.bags[a].end(), td.bags[b].begin(), td.bags[b].end(),
                          std::back_inserter(inter));
    cands.push_back(inter);
  }
  const int n = g.n();
  int best = -1;
  bool best_bal = false;
  int best_size = 0, best_comp = 0;
  Split best_split;
  for (int i = 0; i < static_cast<int>(cands.size()); ++i) {
    Split s = split_without(g, cands[i]);
    const bool bal = 3 * s.max_component <= 2 * n;
    const int sz = static_cast<int>(cands[i].size());
    bool better;
    if (best < 0) better = true;
    else if (bal != best_bal) better = bal;
    else if (bal) better = sz < best_size || (sz == best_size && s.max_component < best_comp);
    else better = s.max_component < best_comp;  // no balanced choice: least bad
    if (better) {
      best = i;
      best_bal = bal;
      best_size = sz;
      best_comp = s.max_component;
      best_split = std::move(s);
    }
  }
  Separator sep;
  sep.X = cands[best];
  sep.A = std::move(best_split.A);
  sep.B = std::move(best_split.B);
  sep.max_component = best_comp;
  return sep;
}

Separator separator_from(const Graph& g, std::vector<int> X) {
  std::sort(X.begin(), X.end());
  X.erase(std::unique(X.begin(), X.end()), X.end());
  for (int x : X)
    if (x < 0 || x >= g.n()) throw std::invalid_argument("separator vertex out of range");
  Split s = split_without(g, X);
  Separator sep;
  sep.X = std::move(X);
  sep.A = std::move(s.A);
  sep.B = std::move(s.B);
  sep.max_component = s.max_component;
  return sep;
}

std::vector<int> SeparatorTree::augmented_a(const SeparatorNode& nd) {
  std::vector<int> v = nd.A;
  v.insert(v.end(), nd.X.begin(), nd.X.end());
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<int> SeparatorTree::augmented_b(const SeparatorNode& nd) {
  std::vector<int> v = nd.B;
  v.insert(v.end(), nd.X.begin(), nd.X.end());
  std::sort(v.begin(), v.end());
  return v;
}

namespace {

int build_node(const Graph& g, std::vector<int> vertices, std::vector<SeparatorNode>& nodes) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  nodes[id].vertices = vertices;
  if (vertices.size() <= 1) return id;
  Subgraph sub = induced_subgraph(g, vertices);
  Separator sep = find_balanced_separator(sub.graph, compute_decomposition(sub.graph));
  auto lift = [&](const std::vector<int>& local) {
    std::vector<int> out;
    for (int v : local) out.push_back(sub.vertex_of[v]);
    return out;
  };
  SeparatorNode nd;
  nd.vertices = std::move(vertices);
  nd.X = lift(sep.X);
  nd.A = lift(sep.A);
  nd.B = lift(sep.B);
  nd.child_a = build_node(g, nd.A, nodes);
  nd.child_b = build_node(g, nd.B, nodes);
  nd.depth = 1 + std::max(nodes[nd.child_a].depth, nodes[nd.child_b].depth);
  nodes[id] = std::move(nd);
  return id;
}

}  // namespace

SeparatorTree build_separator_tree(const Graph& g) {
  SeparatorTree t;
  std::vector<int> all(g.n());
  std::iota(all.begin(), all.end(), 0);
  build_node(g, all, t.nodes_);
  return t;
}

int separator_depth_bound(int n) {
  if (n <= 1) return 1;
  return static_cast<int>(std::ceil(std::log(n) / std::log(1.5) - 1e-12)) + 1;
}

}  // namespace gd
