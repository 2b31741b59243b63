#include <algorithm>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "gnnpe/partition.hpp"
#include "gnnpe/synthetic.hpp"

using namespace gnnpe;

namespace {

void check_cover(const Graph& g, const std::vector<Partition>& parts) {
  std::vector<int> owner(g.vertex_count(), 0);
  for (const auto& p : parts) {
    CHECK(std::is_sorted(p.core_vertices.begin(), p.core_vertices.end()));
    for (VertexId v : p.core_vertices) ++owner[v];
  }
  for (int c : owner) CHECK(c == 1);
}

}  // namespace

TEST_CASE("single partition") {
  Graph g = fixtures::random_connected(10, 5, 3, 1);
  auto parts = partition_graph(g, 10);
  REQUIRE(parts.size() == 1);
  CHECK(parts[0].core_vertices.size() == 10);
  CHECK(parts[0].cut_edges.empty());
  auto e = expand(g, parts[0], 3);
  CHECK(e.halo_vertices.empty());
}

TEST_CASE("two disjoint cliques split along the gap") {
  fixtures::Edges e;
  for (VertexId base : {0u, 5u}) {
    for (VertexId i = 0; i < 5; ++i) {
      for (VertexId j = i + 1; j < 5; ++j) e.emplace_back(base + i, base + j);
    }
  }
  Graph g(std::vector<Label>(10, 1), e);
  auto parts = partition_graph(g, 5);
  REQUIRE(parts.size() == 2);
  check_cover(g, parts);
  CHECK(cut_size(g, assignment_of(parts, 10)) == 0);
}

TEST_CASE("partition count, balance and determinism") {
  SyntheticSpec s;
  s.vertices = 5000;
  s.average_degree = 4.4;
  s.labels = 20;
  Graph g = synthetic_graph(s);
  auto parts = partition_graph(g, 1000);
  CHECK(parts.size() == 5);
  check_cover(g, parts);
  for (const auto& p : parts) {
    CHECK(p.core_vertices.size() >= 500);
    CHECK(p.core_vertices.size() <= 2000);
  }
  auto again = partition_graph(g, 1000);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    CHECK(parts[i].core_vertices == again[i].core_vertices);
  }
  // A ring lattice has small balanced cuts; a random split would cut ~80%.
  CHECK(cut_size(g, assignment_of(parts, g.vertex_count())) < g.edge_count() / 5);

  auto a = assignment_of(parts, g.vertex_count());
  CHECK(parse_assignment(format_assignment(a), g.vertex_count()) == a);
  auto rebuilt = partitions_from_assignment(g, a);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    CHECK(rebuilt[i].core_vertices == parts[i].core_vertices);
    CHECK(rebuilt[i].cut_edges.size() == parts[i].cut_edges.size());
  }
}

TEST_CASE("cut edges have exactly one endpoint inside") {
  Graph g = fixtures::random_connected(400, 400, 5, 4);
  auto parts = partition_graph(g, 100);
  auto a = assignment_of(parts, g.vertex_count());
  std::size_t total = 0;
  for (const auto& p : parts) {
    for (const auto& [in, out] : p.cut_edges) {
      CHECK(a[in] == p.id);
      CHECK(a[out] != p.id);
      CHECK(g.has_edge(in, out));
    }
    total += p.cut_edges.size();
  }
  CHECK(total == 2 * cut_size(g, a));
}

TEST_CASE("expansion") {
  Graph c = fixtures::chain({1, 1, 1, 1});
  Partition p{0, {0}, {}};
  CHECK(expand(c, p, 0).halo_vertices.empty());
  auto e = expand(c, p, 2);
  CHECK(e.halo_vertices == std::vector<VertexId>{1, 2});
  CHECK(e.vertices == std::vector<VertexId>{0, 1, 2});
  CHECK(e.induced.edge_count() == 2);
  CHECK(e.local_id(2) == 2);
  CHECK(e.local_id(3) == -1);
}

TEST_CASE("anchored paths stay inside the expansion") {
  Graph g = fixtures::random_connected(200, 150, 4, 6);
  auto parts = partition_graph(g, 50);
  for (std::size_t l = 0; l <= 3; ++l) {
    for (const auto& p : parts) {
      auto e = expand(g, p, l);
      std::set<VertexId> inside(e.vertices.begin(), e.vertices.end());
      for (const auto& path : enumerate_paths(g, p.core_vertices, l)) {
        for (VertexId v : path.vertices) CHECK(inside.count(v) == 1);
      }
    }
  }
}
