#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gd/chains.hpp"
#include "gd/graph.hpp"

namespace gd {

struct NamedGraph {
  std::string name;
  Graph graph;
};

// Paths and cycles up to 12 vertices, seeded random trees up to 12, partial 2-
// and 3-trees up to 10, and the 3x3 grid.
std::vector<NamedGraph> corpus_graphs();

struct Instance {
  std::string graph_name;
  Graph graph;  // b values applied when b is set
  ChainParams params;
  std::optional<int> b;
  std::string name() const;
};

// Every chain on every graph over the parameters it depends on: lambda in
// {0.5, 1, 2} for weighted kinds, q in {3, 4} for colorings, b in {1, 2} for
// b-problems. Complete colorings are kept only when q >= Delta + 2, b-edge covers only
// when b is at most the minimum degree (otherwise there are none).
std::vector<Instance> corpus_instances(const std::vector<NamedGraph>& graphs);

}  // namespace gd
