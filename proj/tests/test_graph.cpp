#include <algorithm>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "gnnpe/graph.hpp"
#include "gnnpe/synthetic.hpp"

using namespace gnnpe;

namespace {
const char* kTriangle = "t 3 3\nv 0 1 2\nv 1 1 2\nv 2 2 2\ne 0 1\ne 1 2\ne 0 2\n";
}

TEST_CASE("parse a minimal triangle") {
  Graph g = parse_graph(kTriangle);
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge_count() == 3);
  CHECK(g.labels() == std::vector<Label>{1, 1, 2});
  CHECK(g.has_edge(2, 0));
  CHECK(g.label_domain_size() == 2);
}

TEST_CASE("parse a single edge") {
  Graph g = parse_graph("t 2 1\nv 0 5 1\nv 1 5 1\ne 0 1\n");
  CHECK(g.edge_count() == 1);
  CHECK(g.label(0) == 5);
  CHECK(g.label(1) == 5);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_graph(std::string(kTriangle) + "e 0 0\n"), GraphError);
  CHECK_THROWS_AS(parse_graph("v 0 1 0\n"), GraphError);
  CHECK_THROWS_AS(parse_graph("t 2 1\nv 0 1 1\nv 1 1 1\ne 0 5\n"), GraphError);
  CHECK_THROWS_AS(parse_graph("t 2 2\nv 0 1 1\nv 1 1 1\ne 0 1\n"), GraphError);
  CHECK_THROWS_AS(parse_graph("t 2 1\nv 0 1 1\nv 0 1 1\ne 0 1\n"), GraphError);
  CHECK_THROWS_AS(parse_graph("t 2 1\nv 0 0 1\nv 1 1 1\ne 0 1\n"), GraphError);
  CHECK_THROWS_AS(parse_graph("t 2 1\nv 0 1 2\nv 1 1 1\ne 0 1\n"), GraphError);
  CHECK_THROWS_AS(parse_graph("t 2 1\nv 0 1 1\nv 1 1 1\nx 0 1\n"), GraphError);
  CHECK_THROWS_AS(parse_graph("t 2 1\nv 0 1 1\nv 1 1 1 9\ne 0 1\n"), GraphError);
}

TEST_CASE("format and parse round-trip") {
  Graph g = fixtures::random_connected(40, 30, 6, 3);
  Graph h = parse_graph(format_graph(g));
  CHECK(h.labels() == g.labels());
  CHECK(h.edges() == g.edges());
}

TEST_CASE("graph construction invariants") {
  fixtures::Edges dup{{0, 1}, {1, 0}, {0, 1}};
  Graph g({1, 1}, dup);
  CHECK(g.edge_count() == 1);
  fixtures::Edges loop{{0, 0}};
  CHECK_THROWS_AS(Graph({1}, loop), GraphError);
  fixtures::Edges dangling{{0, 3}};
  CHECK_THROWS_AS(Graph({1, 1}, dangling), GraphError);
  CHECK_THROWS_AS(Graph({1, 4}, {}, 3), GraphError);

  Graph r = fixtures::random_connected(60, 80, 5, 9);
  for (VertexId v = 0; v < r.vertex_count(); ++v) {
    auto adj = r.neighbors(v);
    CHECK(std::is_sorted(adj.begin(), adj.end()));
    CHECK(std::adjacent_find(adj.begin(), adj.end()) == adj.end());
    for (VertexId w : adj) CHECK(r.has_edge(w, v));
  }
  CHECK(r.is_connected());
}

TEST_CASE("query graphs must be connected and non-empty") {
  fixtures::Edges none;
  CHECK_THROWS_AS(QueryGraph(Graph({1, 1}, none)), GraphError);
  CHECK_THROWS_AS(QueryGraph{Graph{}}, GraphError);
  CHECK_NOTHROW(QueryGraph(Graph({3}, none)));
}

TEST_CASE("unit stars") {
  Graph t = fixtures::triangle();
  auto s = extract_unit_star(t, 0);
  CHECK(s.center == 0);
  REQUIRE(s.neighbors.size() == 2);
  CHECK(s.neighbors[0].first == 1);
  CHECK(s.neighbors[1].first == 2);

  fixtures::Edges none;
  Graph iso({4}, none);
  CHECK(extract_unit_star(iso, 0).neighbors.empty());

  Graph c = fixtures::chain({1, 2, 3});
  auto b = extract_unit_star(c, 1);
  CHECK(b.center_label == 2);
  CHECK(b.neighbors == std::vector<std::pair<VertexId, Label>>{{0, 1}, {2, 3}});
}

TEST_CASE("substructure enumeration") {
  auto s2 = extract_unit_star(fixtures::star(2), 0);
  CHECK(enumerate_substructures(s2, 10).size() == 4);
  fixtures::Edges none;
  auto s0 = extract_unit_star(Graph({1}, none), 0);
  auto subs0 = enumerate_substructures(s0, 10);
  REQUIRE(subs0.size() == 1);
  CHECK(subs0[0].neighbors.empty());

  auto s9 = extract_unit_star(fixtures::star(9), 0);
  auto subs = enumerate_substructures(s9, 10);
  CHECK(subs.size() == 512);
  std::set<std::vector<std::pair<VertexId, Label>>> distinct;
  for (const auto& sub : subs) {
    distinct.insert(sub.neighbors);
    for (const auto& n : sub.neighbors) {
      CHECK(std::find(s9.neighbors.begin(), s9.neighbors.end(), n) != s9.neighbors.end());
    }
  }
  CHECK(distinct.size() == 512);
  CHECK(subs.front().neighbors.empty());
  CHECK(subs.back().neighbors.size() == 9);
  CHECK_THROWS_AS(enumerate_substructures(s9, 8), GraphError);
}

TEST_CASE("path enumeration") {
  Graph t = fixtures::triangle();
  auto all = fixtures::all_vertices(t);
  auto p2 = enumerate_paths(t, all, 2);
  CHECK(p2.size() == 6);
  std::set<std::vector<VertexId>> orders;
  for (const auto& p : p2) orders.insert(p.vertices);
  CHECK(orders.size() == 6);

  Graph e = fixtures::chain({1, 1});
  std::vector<VertexId> u{0};
  auto p1 = enumerate_paths(e, u, 1);
  REQUIRE(p1.size() == 1);
  CHECK(p1[0].vertices == std::vector<VertexId>{0, 1});

  Graph r = fixtures::random_connected(30, 25, 4, 5);
  auto ar = fixtures::all_vertices(r);
  CHECK(enumerate_paths(r, ar, 0).size() == r.vertex_count());
  for (std::size_t l = 1; l <= 3; ++l) {
    for (const auto& p : enumerate_paths(r, ar, l)) {
      CHECK(p.length() == l);
      std::set<VertexId> d(p.vertices.begin(), p.vertices.end());
      CHECK(d.size() == l + 1);
      for (std::size_t k = 0; k < l; ++k) CHECK(r.has_edge(p.vertices[k], p.vertices[k + 1]));
    }
  }
}

TEST_CASE("label randomization") {
  auto id = label_permutation(30, 0);
  for (Label l = 1; l <= 30; ++l) CHECK(id[l] == l);
  auto p = label_permutation(30, 77);
  CHECK(p == label_permutation(30, 77));
  CHECK(p != label_permutation(30, 78));
  std::vector<Label> img(p.begin() + 1, p.end());
  std::sort(img.begin(), img.end());
  for (Label l = 1; l <= 30; ++l) CHECK(img[l - 1] == l);

  Graph g = fixtures::random_connected(50, 40, 8, 2);
  Graph h = randomize_labels(g, 5);
  CHECK(h.edges() == g.edges());
  CHECK(randomize_labels(g, 5).labels() == h.labels());
  CHECK(randomize_labels(g, 0).labels() == g.labels());
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      CHECK((g.label(u) == g.label(v)) == (h.label(u) == h.label(v)));
    }
  }
}

TEST_CASE("query sampling") {
  Graph e = fixtures::chain({1, 2});
  auto one = sample_query_graph(e, 2, 1.0, 4);
  CHECK(one.graph.edge_count() == 1);

  SyntheticSpec spec;
  spec.vertices = 300;
  spec.average_degree = 4.6;
  spec.labels = 10;
  Graph g = synthetic_graph(spec);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = sample_query_graph(g, 8, 3.0, seed);
    CHECK(s.graph.vertex_count() == 8);
    CHECK(s.graph.edge_count() == 12);
    CHECK(s.graph.is_connected());
    for (VertexId u = 0; u < 8; ++u) CHECK(s.graph.label(u) == g.label(s.source_vertices[u]));
    for (const auto& [a, b] : s.graph.edges()) {
      CHECK(g.has_edge(s.source_vertices[a], s.source_vertices[b]));
    }
    auto again = sample_query_graph(g, 8, 3.0, seed);
    CHECK(again.graph.edges() == s.graph.edges());
    CHECK(again.source_vertices == s.source_vertices);
  }
  Graph ring = fixtures::chain({1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  CHECK_THROWS_AS(sample_query_graph(ring, 5, 3.0, 1), GraphError);
}
