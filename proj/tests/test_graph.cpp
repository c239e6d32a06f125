#include <gtest/gtest.h>

#include <filesystem>

#include "gd/decomposition.hpp"
#include "gd/graph.hpp"

using namespace gd;

namespace {

ParseErrorKind parse_kind(const std::string& text, std::optional<int> q = std::nullopt) {
  try {
    parse_graph(text, q);
  } catch (const ParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no parse error for: " << text;
  return ParseErrorKind::io_error;
}

}  // namespace

TEST(Graph, ParsesPath) {
  const Graph g = parse_graph("3 2\n0 1\n1 2");
  EXPECT_EQ(g.n(), 3);
  EXPECT_EQ(g.m(), 2);
  EXPECT_TRUE(g.adjacent(0, 1));
  EXPECT_TRUE(g.adjacent(2, 1));
  EXPECT_FALSE(g.adjacent(0, 2));
  EXPECT_EQ(g.max_degree(), 2);
}

TEST(Graph, SingleVertex) {
  const Graph g = parse_graph("1 0");
  EXPECT_EQ(g.n(), 1);
  EXPECT_EQ(g.m(), 0);
}

TEST(Graph, ParsesSections) {
  const Graph g = parse_graph("3 2\n0 1\n1 2\n#b\n0 2\n1 1\n2 1\n#roles\n0 steiner\n1 normal\n2 forbidden\n");
  ASSERT_TRUE(g.b_values());
  EXPECT_EQ(*g.b_values(), (std::vector<int>{2, 1, 1}));
  EXPECT_EQ(g.role(0), Role::steiner);
  EXPECT_EQ(g.role(2), Role::forbidden);

  const Graph l = parse_graph("2 1\n0 1\n#lists\n0 1 2\n1 2\n", 3);
  EXPECT_EQ(l.color_list(0, 3), (std::vector<int>{1, 2}));
  EXPECT_EQ(l.color_list(1, 3), (std::vector<int>{2}));
}

TEST(Graph, DefaultsWithoutSections) {
  const Graph g = parse_graph("2 1\n0 1");
  EXPECT_EQ(g.b(0), 1);
  EXPECT_EQ(g.role(1), Role::normal);
  EXPECT_EQ(g.color_list(0, 3), (std::vector<int>{1, 2, 3}));
}

TEST(Graph, ParseErrorsAreDistinct) {
  EXPECT_EQ(parse_kind("x 1\n0 1"), ParseErrorKind::malformed_header);
  EXPECT_EQ(parse_kind("3 2\n0 1\n1 0"), ParseErrorKind::duplicate_edge);
  EXPECT_EQ(parse_kind("3 1\n0 3"), ParseErrorKind::vertex_out_of_range);
  EXPECT_EQ(parse_kind("2 1\n0 1\n#lists\n0 4\n", 3), ParseErrorKind::color_out_of_range);
  EXPECT_EQ(parse_kind("3 2\n0 1"), ParseErrorKind::edge_count_mismatch);
}

TEST(Graph, ParseErrorNamesLine) {
  try {
    parse_graph("3 2\n0 1\n0 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Graph, RoundTripIsByteIdentical) {
  const std::string canon = format_graph(parse_graph("4 3\n0 1\n1 2\n2 3\n#b\n0 2\n1 1\n2 1\n3 2\n"));
  EXPECT_EQ(format_graph(parse_graph(canon)), canon);
  const auto path = std::filesystem::temp_directory_path() / "gd-graph-roundtrip.txt";
  save_graph(parse_graph(canon), path.string());
  EXPECT_EQ(format_graph(load_graph(path.string())), canon);
  std::filesystem::remove(path);
}

TEST(Graph, LoadMissingFile) {
  EXPECT_THROW(load_graph("/nonexistent/graph.txt"), ParseError);
}

TEST(Generate, Families) {
  EXPECT_EQ(generate(Family::path, 5).m(), 4);
  const Graph c3 = generate(Family::cycle, 3);
  EXPECT_EQ(c3.m(), 3);
  EXPECT_EQ(decomposition_width(compute_decomposition(c3)), 2);
  EXPECT_EQ(generate(Family::complete, 4).m(), 6);
  EXPECT_EQ(generate(Family::random_tree, 9, 4).m(), 8);
  EXPECT_EQ(generate(Family::grid, 3, 0, 3).m(), 12);
  EXPECT_THROW(generate(Family::cycle, 2), std::invalid_argument);
  EXPECT_THROW(parse_family("hypercube"), std::invalid_argument);
}

TEST(Generate, PartialKTreeCarriesDecomposition) {
  const Graph g = generate(Family::partial_k_tree, 10, 7, 2);
  EXPECT_EQ(g.n(), 10);
  ASSERT_TRUE(g.construction_decomposition());
  EXPECT_TRUE(validate_decomposition(g, *g.construction_decomposition()).ok());
  EXPECT_LE(decomposition_width(*g.construction_decomposition()), 2);
}

TEST(Generate, PathDecompositionHasWidthOne) {
  const Graph g = generate(Family::path, 8);
  const TreeDecomposition td = g.construction_decomposition() ? *g.construction_decomposition() : compute_decomposition(g);
  EXPECT_EQ(decomposition_width(td), 1);
}

TEST(Generate, IsPureFunctionOfArguments) {
  for (Family f : {Family::random_tree, Family::partial_k_tree}) {
    const int k = f == Family::partial_k_tree ? 3 : 0;
    EXPECT_EQ(format_graph(generate(f, 9, 42, k)), format_graph(generate(f, 9, 42, k)));
  }
  EXPECT_NE(format_graph(generate(Family::random_tree, 12, 1)), format_graph(generate(Family::random_tree, 12, 2)));
}

TEST(Graph, InducedSubgraphMapsBack) {
  const Graph g = generate(Family::cycle, 5);
  const Subgraph s = induced_subgraph(g, {0, 1, 2});
  EXPECT_EQ(s.graph.n(), 3);
  EXPECT_EQ(s.graph.m(), 2);
  for (int e = 0; e < s.graph.m(); ++e) {
    auto [u, v] = s.graph.edges()[e];
    EXPECT_EQ(g.edges()[s.edge_of[e]], std::make_pair(s.vertex_of[u], s.vertex_of[v]));
  }
}
