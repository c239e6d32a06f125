#include <gtest/gtest.h>

#include <cmath>
#include <queue>

#include "gd/decomposition.hpp"

using namespace gd;

namespace {

TreeDecomposition td(std::vector<std::vector<int>> bags, std::vector<std::pair<int, int>> edges) {
  TreeDecomposition t;
  t.bags = std::move(bags);
  t.tree_edges = std::move(edges);
  return t;
}

// BFS from A inside X u A u B, avoiding X, never reaches B.
bool separates(const Graph& g, const std::vector<int>& X, const std::vector<int>& A, const std::vector<int>& B) {
  std::vector<char> blocked(g.n(), 1), seen(g.n(), 0), in_b(g.n(), 0);
  for (int v : A) blocked[v] = 0;
  for (int v : B) blocked[v] = 0;
  for (int b : B) in_b[b] = 1;
  std::queue<int> q;
  for (int a : A) q.push(a), seen[a] = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    if (in_b[v]) return false;
    for (int w : g.neighbors(v))
      if (!blocked[w] && !seen[w]) seen[w] = 1, q.push(w);
  }
  return true;
}

}  // namespace

TEST(Validate, PathBags) {
  const Graph p3 = generate(Family::path, 3);
  EXPECT_TRUE(validate_decomposition(p3, td({{0, 1}, {1, 2}}, {{0, 1}})).ok());
  const auto bad = validate_decomposition(p3, td({{0, 1}, {2}}, {{0, 1}}));
  EXPECT_FALSE(bad.edge_cover);
  ASSERT_TRUE(bad.missing_edge);
  EXPECT_EQ(*bad.missing_edge, std::make_pair(1, 2));
}

TEST(Validate, DetectsEachCondition) {
  const Graph p3 = generate(Family::path, 3);
  EXPECT_FALSE(validate_decomposition(p3, td({{0, 1}}, {})).vertex_cover);
  const auto split = validate_decomposition(p3, td({{0, 1}, {1, 2}, {0}}, {{0, 1}, {1, 2}}));
  EXPECT_FALSE(split.connected);
  EXPECT_FALSE(validate_decomposition(p3, td({{0, 1}, {1, 2}}, {})).is_tree);
}

TEST(Width, Values) {
  EXPECT_EQ(decomposition_width(td({{0, 1}, {1, 2}}, {{0, 1}})), 1);
  EXPECT_EQ(decomposition_width(td({{0, 1, 2}}, {})), 2);
  EXPECT_THROW(decomposition_width(TreeDecomposition{}), std::invalid_argument);
  EXPECT_TRUE(validate_decomposition(generate(Family::complete, 3), td({{0, 1, 2}}, {})).ok());
}

TEST(Compute, KnownWidths) {
  EXPECT_EQ(decomposition_width(compute_decomposition(generate(Family::random_tree, 7, 3))), 1);
  EXPECT_EQ(decomposition_width(compute_decomposition(generate(Family::cycle, 5))), 2);
  const TreeDecomposition one = compute_decomposition(generate(Family::path, 1));
  ASSERT_EQ(one.bags.size(), 1u);
  EXPECT_EQ(one.bags[0], std::vector<int>{0});
}

TEST(Compute, AlwaysValid) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Graph g = generate(Family::partial_k_tree, 6 + seed % 9, seed, 1 + seed % 3);
    const TreeDecomposition t = compute_decomposition(g);
    EXPECT_TRUE(validate_decomposition(g, t).ok()) << seed;
    const TreeDecomposition back = parse_decomposition(format_decomposition(t));
    EXPECT_EQ(back.bags, t.bags);
    EXPECT_EQ(back.tree_edges, t.tree_edges);
  }
}

TEST(Separator, Examples) {
  const Graph p3 = generate(Family::path, 3);
  const Separator s = find_balanced_separator(p3, compute_decomposition(p3));
  EXPECT_EQ(s.X, std::vector<int>{1});
  EXPECT_EQ(s.A.size() + s.B.size(), 2u);
  const Graph p7 = generate(Family::path, 7);
  EXPECT_EQ(find_balanced_separator(p7, compute_decomposition(p7)).X, std::vector<int>{3});
  const Graph k2 = generate(Family::path, 2);
  const Separator e = find_balanced_separator(k2, compute_decomposition(k2));
  EXPECT_TRUE(e.A.empty() || e.B.empty());
}

TEST(Separator, BalancedAndSeparatingOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Graph g = generate(Family::partial_k_tree, 5 + seed % 10, seed, 1 + seed % 3);
    const TreeDecomposition t = compute_decomposition(g);
    const Separator s = find_balanced_separator(g, t);
    EXPECT_LE(static_cast<int>(s.X.size()), decomposition_width(t) + 1);
    EXPECT_LE(3 * s.max_component, 2 * g.n());
    EXPECT_TRUE(separates(g, s.X, s.A, s.B));
    EXPECT_EQ(s.X.size() + s.A.size() + s.B.size(), static_cast<size_t>(g.n()));
  }
}

TEST(SeparatorTree, Examples) {
  EXPECT_TRUE(build_separator_tree(generate(Family::path, 1)).root().leaf());
  const SeparatorTree p3 = build_separator_tree(generate(Family::path, 3));
  EXPECT_EQ(p3.root().X, std::vector<int>{1});
  ASSERT_FALSE(p3.root().leaf());
  EXPECT_TRUE(p3.node(p3.root().child_a).leaf());
  EXPECT_TRUE(p3.node(p3.root().child_b).leaf());
  EXPECT_LE(build_separator_tree(generate(Family::path, 15)).depth(), 8);
  EXPECT_EQ(separator_depth_bound(15), 8);
}

TEST(SeparatorTree, EveryNodeSeparatesWithinDepthBound) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = generate(seed % 2 ? Family::partial_k_tree : Family::random_tree, 4 + seed % 12, seed, 2);
    const SeparatorTree tree = build_separator_tree(g);
    EXPECT_LE(tree.depth(), separator_depth_bound(g.n()));
    for (int i = 0; i < tree.size(); ++i) {
      const SeparatorNode& nd = tree.node(i);
      if (nd.leaf()) continue;
      EXPECT_TRUE(separates(g, nd.X, nd.A, nd.B)) << "seed " << seed << " node " << i;
    }
  }
}

TEST(SeparatorTree, DisconnectedGraphHasEmptyRootSeparator) {
  const Graph g = Graph::from_edges(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}});
  const SeparatorTree t = build_separator_tree(g);
  EXPECT_TRUE(t.root().X.empty());
  EXPECT_LE(t.depth(), separator_depth_bound(6));
}
