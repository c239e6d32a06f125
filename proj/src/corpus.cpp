#include "gd/corpus.hpp"

#include <algorithm>
#include <cstdio>

namespace gd {

std::vector<NamedGraph> corpus_graphs() {
  std::vector<NamedGraph> out;
  auto add = [&](std::string name, Graph g) { out.push_back({std::move(name), std::move(g)}); };
  for (int n = 1; n <= 12; ++n) add("path-" + std::to_string(n), generate(Family::path, n));
  for (int n = 3; n <= 12; ++n) add("cycle-" + std::to_string(n), generate(Family::cycle, n));
  for (int n = 4; n <= 12; ++n) add("tree-" + std::to_string(n), generate(Family::random_tree, n, n));
  for (int n = 4; n <= 10; ++n) add("pk2-" + std::to_string(n), generate(Family::partial_k_tree, n, n, 2));
  for (int n = 5; n <= 10; ++n) add("pk3-" + std::to_string(n), generate(Family::partial_k_tree, n, n, 3));
  add("grid-3x3", generate(Family::grid, 3, 0, 3));
  return out;
}

std::string Instance::name() const {
  std::string s = graph_name + "/" + chain_name(params.kind);
  char buf[64];
  if (!is_uniform_chain(params.kind)) {
    std::snprintf(buf, sizeof buf, "/lambda=%g", params.lambda);
    s += buf;
  }
  if (is_coloring_chain(params.kind)) s += "/q=" + std::to_string(params.q);
  if (b) s += "/b=" + std::to_string(*b);
  return s;
}

std::vector<Instance> corpus_instances(const std::vector<NamedGraph>& graphs) {
  std::vector<Instance> out;
  for (const auto& [name, g] : graphs) {
    int min_degree = g.n() ? g.degree(0) : 0;
    for (int v = 0; v < g.n(); ++v) min_degree = std::min(min_degree, g.degree(v));
    for (ChainKind kind : kAllChains) {
      std::vector<double> lambdas = {1.0};
      if (!is_uniform_chain(kind)) lambdas = {0.5, 1.0, 2.0};
      std::vector<int> qs = {3};
      if (is_coloring_chain(kind)) qs = {3, 4};
      std::vector<std::optional<int>> bs = {std::nullopt};
      if (is_edge_chain(kind)) bs = {1, 2};
      for (double lam : lambdas)
        for (int q : qs) {
          if (kind == ChainKind::q_coloring && q < g.max_degree() + 2) continue;
          for (const auto& b : bs) {
            if (kind == ChainKind::b_edge_cover && *b > min_degree) continue;
            Instance in{name, g, {kind, lam, q}, b};
            if (b) in.graph.set_b_values(std::vector<int>(g.n(), *b));
            out.push_back(std::move(in));
          }
        }
    }
  }
  return out;
}

}  // namespace gd
