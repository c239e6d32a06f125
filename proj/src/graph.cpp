#include "gd/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "gd/rng.hpp"

namespace gd {

const char* role_name(Role r) {
  switch (r) {
    case Role::normal: return "normal";
    case Role::steiner: return "steiner";
    case Role::forbidden: return "forbidden";
  }
  return "?";
}

Role parse_role(const std::string& s) {
  if (s == "normal") return Role::normal;
  if (s == "steiner") return Role::steiner;
  if (s == "forbidden") return Role::forbidden;
  throw std::invalid_argument("unknown role '" + s + "'");
}

Graph Graph::from_edges(int n, std::vector<std::pair<int, int>> edges) {
  if (n < 0) throw GraphError("negative vertex count");
  for (auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw GraphError("edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
    if (u == v) throw GraphError("self loop at " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw GraphError("duplicate edge");
  Graph g;
  g.n_ = n;
  g.edges_ = std::move(edges);
  g.adj_.assign(n, {});
  g.adj_edges_.assign(n, {});
  std::vector<std::vector<std::pair<int, int>>> tmp(n);
  for (int e = 0; e < g.m(); ++e) {
    auto [u, v] = g.edges_[e];
    tmp[u].push_back({v, e});
    tmp[v].push_back({u, e});
  }
  for (int v = 0; v < n; ++v) {
    std::sort(tmp[v].begin(), tmp[v].end());
    for (auto [w, e] : tmp[v]) {
      g.adj_[v].push_back(w);
      g.adj_edges_[v].push_back(e);
    }
  }
  return g;
}

int Graph::max_degree() const {
  int d = 0;
  for (int v = 0; v < n_; ++v) d = std::max(d, degree(v));
  return d;
}

int Graph::edge_id(int u, int v) const {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) return -1;
  const auto& nb = adj_[u];
  auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return -1;
  return adj_edges_[u][it - nb.begin()];
}

std::vector<int> Graph::color_list(int v, int q) const {
  if (lists_ && !(*lists_)[v].empty()) return (*lists_)[v];
  std::vector<int> all(q);
  std::iota(all.begin(), all.end(), 1);
  return all;
}

void Graph::set_b_values(std::vector<int> b) {
  if (static_cast<int>(b.size()) != n_) throw GraphError("b_values size mismatch");
  for (int x : b)
    if (x < 0) throw GraphError("negative b value");
  b_ = std::move(b);
}

void Graph::set_color_lists(std::vector<std::vector<int>> lists) {
  if (static_cast<int>(lists.size()) != n_) throw GraphError("color_lists size mismatch");
  for (auto& l : lists) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    for (int c : l)
      if (c < 1) throw GraphError("color below 1");
  }
  lists_ = std::move(lists);
}

void Graph::set_roles(std::vector<Role> roles) {
  if (static_cast<int>(roles.size()) != n_) throw GraphError("roles size mismatch");
  roles_ = std::move(roles);
}

namespace {

void copy_annotations(const Graph& g, const std::vector<int>& vertex_of, Graph& out) {
  if (g.b_values()) {
    std::vector<int> b;
    for (int v : vertex_of) b.push_back(g.b(v));
    out.set_b_values(std::move(b));
  }
  if (g.color_lists()) {
    std::vector<std::vector<int>> l;
    for (int v : vertex_of) l.push_back((*g.color_lists())[v]);
    out.set_color_lists(std::move(l));
  }
  if (g.roles()) {
    std::vector<Role> r;
    for (int v : vertex_of) r.push_back(g.role(v));
    out.set_roles(std::move(r));
  }
}

}  // namespace

Subgraph induced_subgraph(const Graph& g, const std::vector<int>& vertices) {
  std::vector<int> edge_ids;
  std::vector<char> in(g.n(), 0);
  for (int v : vertices) in[v] = 1;
  for (int e = 0; e < g.m(); ++e)
    if (in[g.edges()[e].first] && in[g.edges()[e].second]) edge_ids.push_back(e);
  return edge_subgraph(g, vertices, edge_ids);
}

Subgraph edge_subgraph(const Graph& g, const std::vector<int>& vertices,
                       const std::vector<int>& edge_ids) {
  Subgraph s;
  s.vertex_of = vertices;
  std::sort(s.vertex_of.begin(), s.vertex_of.end());
  s.vertex_of.erase(std::unique(s.vertex_of.begin(), s.vertex_of.end()), s.vertex_of.end());
  std::vector<int> local(g.n(), -1);
  for (int i = 0; i < static_cast<int>(s.vertex_of.size()); ++i) local[s.vertex_of[i]] = i;
  std::vector<int> ids = edge_ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<std::pair<int, int>> es;
  for (int e : ids) {
    auto [u, v] = g.edges()[e];
    if (local[u] < 0 || local[v] < 0) throw GraphError("edge_subgraph: endpoint outside vertex set");
    es.push_back({local[u], local[v]});
  }
  s.graph = Graph::from_edges(static_cast<int>(s.vertex_of.size()), es);
  // Parent edges are sorted by (u,v) and local ids are monotone, so the
  // canonical order of the subgraph matches `ids`.
  s.edge_of = ids;
  copy_annotations(g, s.vertex_of, s.graph);
  return s;
}

// ---- parsing ----

const char* parse_error_kind_name(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::malformed_header: return "malformed header";
    case ParseErrorKind::malformed_line: return "malformed line";
    case ParseErrorKind::self_loop: return "self loop";
    case ParseErrorKind::duplicate_edge: return "duplicate edge";
    case ParseErrorKind::vertex_out_of_range: return "vertex out of range";
    case ParseErrorKind::color_out_of_range: return "list color outside [q]";
    case ParseErrorKind::edge_count_mismatch: return "edge count mismatch";
    case ParseErrorKind::unknown_section: return "unknown section";
    case ParseErrorKind::bad_role: return "bad role";
    case ParseErrorKind::io_error: return "i/o error";
  }
  return "?";
}

ParseError::ParseError(ParseErrorKind kind, int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + parse_error_kind_name(kind) +
                         (what.empty() ? "" : ": " + what)),
      kind_(kind),
      line_(line) {}

namespace {

bool parse_ints(const std::string& line, std::vector<long long>& out) {
  out.clear();
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    size_t pos = 0;
    long long x;
    try {
      x = std::stoll(tok, &pos);
    } catch (...) {
      return false;
    }
    if (pos != tok.size()) return false;
    out.push_back(x);
  }
  return true;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> t;
  std::string s;
  while (is >> s) t.push_back(s);
  return t;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Graph parse_graph(const std::string& text, std::optional<int> q) {
  std::vector<std::string> lines;
  {
    std::istringstream is(text);
    std::string l;
    while (std::getline(is, l)) lines.push_back(l);
  }
  size_t i = 0;
  auto lineno = [&](size_t idx) { return static_cast<int>(idx) + 1; };
  while (i < lines.size() && blank(lines[i])) ++i;
  if (i == lines.size()) throw ParseError(ParseErrorKind::malformed_header, 1, "empty input");
  std::vector<long long> nums;
  if (!parse_ints(lines[i], nums) || nums.size() != 2 || nums[0] < 0 || nums[1] < 0)
    throw ParseError(ParseErrorKind::malformed_header, lineno(i), "expected 'n m'");
  const int n = static_cast<int>(nums[0]);
  const long long m = nums[1];
  ++i;
  std::vector<std::pair<int, int>> edges;
  std::set<std::pair<int, int>> seen;
  while (static_cast<long long>(edges.size()) < m) {
    if (i == lines.size() || (!blank(lines[i]) && lines[i].find('#') == lines[i].find_first_not_of(" \t")))
      throw ParseError(ParseErrorKind::edge_count_mismatch, lineno(std::min(i, lines.size())),
                       "expected " + std::to_string(m) + " edges, found " + std::to_string(edges.size()));
    if (blank(lines[i])) {
      ++i;
      continue;
    }
    if (!parse_ints(lines[i], nums) || nums.size() != 2)
      throw ParseError(ParseErrorKind::malformed_line, lineno(i), "expected 'u v'");
    long long u = nums[0], v = nums[1];
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw ParseError(ParseErrorKind::vertex_out_of_range, lineno(i), lines[i]);
    if (u == v) throw ParseError(ParseErrorKind::self_loop, lineno(i), lines[i]);
    std::pair<int, int> key{static_cast<int>(std::min(u, v)), static_cast<int>(std::max(u, v))};
    if (!seen.insert(key).second) throw ParseError(ParseErrorKind::duplicate_edge, lineno(i), lines[i]);
    edges.push_back(key);
    ++i;
  }
  Graph g = Graph::from_edges(n, edges);

  std::optional<std::vector<int>> b;
  std::optional<std::vector<std::vector<int>>> lists;
  std::optional<std::vector<Role>> roles;
  enum { none, sec_b, sec_lists, sec_roles } section = none;
  std::vector<char> mentioned;
  for (; i < lines.size(); ++i) {
    const std::string& l = lines[i];
    if (blank(l)) continue;
    auto t = tokens(l);
    if (t[0][0] == '#') {
      if (t.size() != 1) throw ParseError(ParseErrorKind::unknown_section, lineno(i), l);
      if (t[0] == "#b" && !b) {
        section = sec_b;
        b.emplace(n, 1);
      } else if (t[0] == "#lists" && !lists) {
        section = sec_lists;
        lists.emplace(n);
      } else if (t[0] == "#roles" && !roles) {
        section = sec_roles;
        roles.emplace(n, Role::normal);
      } else {
        throw ParseError(ParseErrorKind::unknown_section, lineno(i), l);
      }
      mentioned.assign(n, 0);
      continue;
    }
    if (section == none) throw ParseError(ParseErrorKind::malformed_line, lineno(i), "line outside any section");
    long long v;
    try {
      size_t pos = 0;
      v = std::stoll(t[0], &pos);
      if (pos != t[0].size()) throw std::invalid_argument("");
    } catch (...) {
      throw ParseError(ParseErrorKind::malformed_line, lineno(i), l);
    }
    if (v < 0 || v >= n) throw ParseError(ParseErrorKind::vertex_out_of_range, lineno(i), l);
    if (mentioned[v]) throw ParseError(ParseErrorKind::malformed_line, lineno(i), "vertex listed twice");
    mentioned[v] = 1;
    if (section == sec_b) {
      if (!parse_ints(l, nums) || nums.size() != 2 || nums[1] < 0)
        throw ParseError(ParseErrorKind::malformed_line, lineno(i), "expected 'v value'");
      (*b)[v] = static_cast<int>(nums[1]);
    } else if (section == sec_lists) {
      if (!parse_ints(l, nums) || nums.size() < 2)
        throw ParseError(ParseErrorKind::malformed_line, lineno(i), "expected 'v c1 c2 ...'");
      for (size_t k = 1; k < nums.size(); ++k) {
        if (nums[k] < 1 || (q && nums[k] > *q))
          throw ParseError(ParseErrorKind::color_out_of_range, lineno(i), std::to_string(nums[k]));
        (*lists)[v].push_back(static_cast<int>(nums[k]));
      }
    } else {
      if (t.size() != 2) throw ParseError(ParseErrorKind::malformed_line, lineno(i), "expected 'v role'");
      try {
        (*roles)[v] = parse_role(t[1]);
      } catch (const std::invalid_argument&) {
        throw ParseError(ParseErrorKind::bad_role, lineno(i), t[1]);
      }
    }
  }
  if (b) g.set_b_values(*b);
  if (lists) g.set_color_lists(*lists);
  if (roles) g.set_roles(*roles);
  return g;
}

Graph load_graph(const std::string& path, std::optional<int> q) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseErrorKind::io_error, 0, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph(ss.str(), q);
}

std::string format_graph(const Graph& g) {
  std::ostringstream os;
  os << g.n() << ' ' << g.m() << '\n';
  for (auto [u, v] : g.edges()) os << u << ' ' << v << '\n';
  if (g.b_values()) {
    os << "#b\n";
    for (int v = 0; v < g.n(); ++v) os << v << ' ' << g.b(v) << '\n';
  }
  if (g.color_lists()) {
    os << "#lists\n";
    for (int v = 0; v < g.n(); ++v) {
      const auto& l = (*g.color_lists())[v];
      if (l.empty()) continue;
      os << v;
      for (int c : l) os << ' ' << c;
      os << '\n';
    }
  }
  if (g.roles()) {
    os << "#roles\n";
    for (int v = 0; v < g.n(); ++v) os << v << ' ' << role_name(g.role(v)) << '\n';
  }
  return os.str();
}

void save_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(ParseErrorKind::io_error, 0, "cannot write " + path);
  out << format_graph(g);
}

// ---- generators ----

Family parse_family(const std::string& s) {
  if (s == "path") return Family::path;
  if (s == "cycle") return Family::cycle;
  if (s == "complete") return Family::complete;
  if (s == "random_tree") return Family::random_tree;
  if (s == "partial_k_tree") return Family::partial_k_tree;
  if (s == "grid") return Family::grid;
  throw std::invalid_argument("unsupported family '" + s + "'");
}

const char* family_name(Family f) {
  switch (f) {
    case Family::path: return "path";
    case Family::cycle: return "cycle";
    case Family::complete: return "complete";
    case Family::random_tree: return "random_tree";
    case Family::partial_k_tree: return "partial_k_tree";
    case Family::grid: return "grid";
  }
  return "?";
}

namespace {

Graph make_partial_k_tree(int n, std::uint64_t seed, int k) {
  if (k < 1) throw std::invalid_argument("partial_k_tree needs k >= 1");
  SplitMix64 rng(seed);
  std::vector<std::pair<int, int>> edges;
  std::vector<char> keep;  // protected edges are never deleted
  TreeDecomposition td;
  const int base = std::min(n, k + 1);
  std::vector<int> bag0(base);
  std::iota(bag0.begin(), bag0.end(), 0);
  td.bags.push_back(bag0);
  for (int u = 0; u < base; ++u)
    for (int v = u + 1; v < base; ++v) {
      edges.push_back({u, v});
      keep.push_back(v == u + 1);
    }
  // k-cliques available for attachment, with the bag that contains them.
  std::vector<std::pair<std::vector<int>, int>> cliques;
  if (n > k) {
    for (int skip = 0; skip < base; ++skip) {
      std::vector<int> c;
      for (int u = 0; u < base; ++u)
        if (u != skip) c.push_back(u);
      cliques.push_back({c, 0});
    }
  }
  for (int v = base; v < n; ++v) {
    auto [c, bag] = cliques[rng.below(cliques.size())];
    std::vector<int> nb = c;
    nb.push_back(v);
    std::sort(nb.begin(), nb.end());
    td.bags.push_back(nb);
    const int id = static_cast<int>(td.bags.size()) - 1;
    td.tree_edges.push_back({bag, id});
    for (size_t i = 0; i < c.size(); ++i) {
      edges.push_back({c[i], v});
      keep.push_back(i == 0);
    }
    for (size_t drop = 0; drop < c.size(); ++drop) {
      std::vector<int> nc;
      for (size_t i = 0; i < c.size(); ++i)
        if (i != drop) nc.push_back(c[i]);
      nc.push_back(v);
      std::sort(nc.begin(), nc.end());
      cliques.push_back({nc, id});
    }
  }
  std::vector<std::pair<int, int>> kept;
  for (size_t i = 0; i < edges.size(); ++i)
    if (keep[i] || rng.below(3) != 0) kept.push_back(edges[i]);
  Graph g = Graph::from_edges(n, kept);
  g.set_construction_decomposition(std::move(td));
  return g;
}

}  // namespace

Graph generate(Family family, int n, std::uint64_t seed, int k) {
  if (n < 1) throw std::invalid_argument("generate: n must be >= 1");
  std::vector<std::pair<int, int>> edges;
  switch (family) {
    case Family::path: {
      TreeDecomposition td;
      if (n == 1) td.bags.push_back({0});
      for (int i = 0; i + 1 < n; ++i) {
        edges.push_back({i, i + 1});
        td.bags.push_back({i, i + 1});
        if (i > 0) td.tree_edges.push_back({i - 1, i});
      }
      Graph g = Graph::from_edges(n, edges);
      g.set_construction_decomposition(std::move(td));
      return g;
    }
    case Family::cycle:
      if (n < 3) throw std::invalid_argument("generate: cycle needs n >= 3");
      for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
      return Graph::from_edges(n, edges);
    case Family::complete:
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) edges.push_back({u, v});
      return Graph::from_edges(n, edges);
    case Family::random_tree: {
      SplitMix64 rng(seed);
      for (int v = 1; v < n; ++v) edges.push_back({static_cast<int>(rng.below(v)), v});
      return Graph::from_edges(n, edges);
    }
    case Family::partial_k_tree:
      return make_partial_k_tree(n, seed, k);
    case Family::grid: {
      const int rows = n, cols = k > 0 ? k : n;
      auto id = [&](int r, int c) { return r * cols + c; };
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
          if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1)});
          if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c)});
        }
      return Graph::from_edges(rows * cols, edges);
    }
  }
  throw std::invalid_argument("unsupported family");
}

}  // namespace gd
