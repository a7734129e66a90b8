#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "graphlay/bench.hpp"
#include "graphlay/graph.hpp"

using namespace graphlay;

namespace {

Graph path3() { return parse_edge_list_text("0 1\n1 2\n"); }

}  // namespace

TEST_CASE("edge list parsing") {
  const Graph p3 = path3();
  CHECK(p3.num_nodes() == 3);
  CHECK(p3.num_edges() == 2);
  CHECK(p3.degree(1) == 2);

  SUBCASE("duplicate edges collapse") {
    const Graph p2 = parse_edge_list_text("0 1\n0 1\n");
    CHECK(p2.num_nodes() == 2);
    CHECK(p2.num_edges() == 1);
  }
  SUBCASE("comments and blank lines") {
    const Graph g = parse_edge_list_text("# header\n0 1\n\n1 2 # trailing\n");
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_edges() == 2);
  }
  SUBCASE("disconnected input rejected") {
    CHECK_THROWS_AS(parse_edge_list_text("0 1\n2 3\n"), DisconnectedError);
  }
  SUBCASE("malformed line reports its number") {
    try {
      parse_edge_list_text("0 1\nfoo bar\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("self loop rejected") {
    CHECK_THROWS_AS(parse_edge_list_text("0 0\n"), ParseError);
  }
  SUBCASE("empty input rejected") {
    CHECK_THROWS_AS(parse_edge_list_text(""), ParseError);
    CHECK_THROWS_AS(parse_edge_list_text("# only a comment\n"), ParseError);
  }
}

TEST_CASE("edge list round trip") {
  const Graph g = parse_edge_list_text("3 1\n0 1\n2 3\n0 2\n");
  const std::string serialized = to_edge_list(g);
  const Graph again = parse_edge_list_text(serialized);
  CHECK(again.num_nodes() == g.num_nodes());
  CHECK(again.edges() == g.edges());
  CHECK(to_edge_list(again) == serialized);
}

TEST_CASE("graphml subset") {
  const char* minimal = R"(<?xml version="1.0" encoding="UTF-8"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <graph id="G" edgedefault="undirected">
    <node id="n0"/>
    <node id="n1"/>
    <edge source="n0" target="n1"/>
  </graph>
</graphml>)";
  const Graph p2 = parse_graphml_text(minimal);
  CHECK(p2.num_nodes() == 2);
  CHECK(p2.num_edges() == 1);
  CHECK(p2.label(0) == "n0");
  CHECK(p2.label(1) == "n1");

  SUBCASE("rome-style document with data elements") {
    // Same shape as the published Rome corpus files.
    std::string doc = "<?xml version=\"1.0\"?>\n<graphml>\n<graph id=\"grafo138\" "
                      "edgedefault=\"undirected\">\n";
    for (int i = 0; i < 12; ++i)
      doc += "<node id=\"n" + std::to_string(i) + "\">\n<data key=\"x\">0</data>\n</node>\n";
    const int edges[][2] = {{0, 1},  {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0},
                            {1, 6},  {6, 7}, {7, 8}, {8, 2}, {9, 3}, {9, 10},
                            {10, 11}, {11, 4}};
    for (auto [u, v] : edges)
      doc += "<edge source=\"n" + std::to_string(u) + "\" target=\"n" +
             std::to_string(v) + "\"/>\n";
    doc += "</graph>\n</graphml>\n";
    const Graph g = parse_graphml_text(doc);
    CHECK(g.num_nodes() == 12);
    CHECK(g.num_nodes() >= 10);
    CHECK(g.num_nodes() <= 107);
    CHECK(g.num_edges() == 14);
    CHECK(is_connected(g.num_nodes(), g.edges()));
  }
  SUBCASE("edge to undeclared node") {
    const char* bad = R"(<graphml><graph>
      <node id="a"/><node id="b"/>
      <edge source="a" target="zz"/>
    </graph></graphml>)";
    CHECK_THROWS_AS(parse_graphml_text(bad), ParseError);
  }
  SUBCASE("malformed xml") {
    CHECK_THROWS_AS(parse_graphml_text("<graph><node id=unquoted/></graph>"),
                    ParseError);
    CHECK_THROWS_AS(parse_graphml_text("<graph><node id=\"a\""), ParseError);
    CHECK_THROWS_AS(parse_graphml_text("no tags at all"), ParseError);
  }
  SUBCASE("document order defines indices") {
    const char* doc = R"(<graphml><graph>
      <node id="z"/><node id="a"/><node id="m"/>
      <edge source="z" target="a"/><edge source="a" target="m"/>
    </graph></graphml>)";
    const Graph g = parse_graphml_text(doc);
    CHECK(g.label(0) == "z");
    CHECK(g.label(1) == "a");
    CHECK(g.label(2) == "m");
  }
}

TEST_CASE("all pairs bfs") {
  const Graph p3 = path3();
  const DistanceMatrix d = all_pairs_bfs(p3);
  CHECK(d(0, 2) == 2);
  CHECK(d(0, 1) == 1);
  CHECK(d(1, 1) == 0);

  SUBCASE("complete graph") {
    const Graph k4 = parse_edge_list_text("0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    const DistanceMatrix dk = all_pairs_bfs(k4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(dk(i, j) == (i == j ? 0 : 1));
  }
  SUBCASE("5x5 grid corner to corner") {
    std::string edges;
    auto id = [](int r, int c) { return r * 5 + c; };
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) {
        if (c + 1 < 5)
          edges += std::to_string(id(r, c)) + " " + std::to_string(id(r, c + 1)) + "\n";
        if (r + 1 < 5)
          edges += std::to_string(id(r, c)) + " " + std::to_string(id(r + 1, c)) + "\n";
      }
    const Graph grid = parse_edge_list_text(edges);
    const DistanceMatrix dg = all_pairs_bfs(grid);
    CHECK(dg(0, 24) == 8);
  }
  SUBCASE("parallel matches serial reference") {
    const Graph g = generate_random_connected(40, 7);
    const DistanceMatrix par = all_pairs_bfs(g);
    const DistanceMatrix ser = serial::all_pairs_bfs(g);
    for (int i = 0; i < g.num_nodes(); ++i)
      for (int j = 0; j < g.num_nodes(); ++j) CHECK(par(i, j) == ser(i, j));
  }
}

TEST_CASE("distance matrix invariants on random corpus") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Graph g = generate_random_connected(5 + static_cast<int>(seed) * 4, seed);
    const DistanceMatrix d = all_pairs_bfs(g);
    const int n = g.num_nodes();
    for (int i = 0; i < n; ++i) {
      CHECK(d(i, i) == 0);
      for (int j = 0; j < n; ++j) {
        CHECK(d(i, j) == d(j, i));
        if (i != j) CHECK(d(i, j) >= 1);
      }
    }
    // Triangle inequality.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) CHECK(d(i, k) <= d(i, j) + d(j, k));
  }
}

TEST_CASE("relabeling preserves distances") {
  const Graph g = generate_random_connected(12, 99);
  Rng rng(5);
  std::vector<int> perm = rng.permutation(g.num_nodes());
  std::vector<std::pair<int, int>> relabeled;
  for (auto [u, v] : g.edges()) relabeled.emplace_back(perm[u], perm[v]);
  const Graph h = Graph::from_edges(g.num_nodes(), relabeled);
  const DistanceMatrix dg = all_pairs_bfs(g);
  const DistanceMatrix dh = all_pairs_bfs(h);
  for (int i = 0; i < g.num_nodes(); ++i)
    for (int j = 0; j < g.num_nodes(); ++j)
      CHECK(dh(perm[i], perm[j]) == dg(i, j));
}

TEST_CASE("connectivity and degree stats") {
  CHECK(is_connected(3, {{0, 1}, {1, 2}}));
  CHECK_FALSE(is_connected(4, {{0, 1}, {2, 3}}));

  const Graph p3 = path3();
  const DegreeStats s3 = degree_stats(p3);
  CHECK(s3.max == 2);
  CHECK(s3.min == 1);

  const Graph star = parse_edge_list_text("0 1\n0 2\n0 3\n");
  const DegreeStats ss = degree_stats(star);
  CHECK(ss.max == 3);
  CHECK(ss.mean == doctest::Approx(1.5));
}
