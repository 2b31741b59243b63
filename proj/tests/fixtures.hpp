#pragma once

#include <numeric>
#include <utility>
#include <vector>

#include "gnnpe/graph.hpp"
#include "gnnpe/random.hpp"

namespace fixtures {

using gnnpe::Graph;
using gnnpe::Label;
using gnnpe::VertexId;
using Edges = std::vector<std::pair<VertexId, VertexId>>;

inline Graph triangle(Label a = 1, Label b = 1, Label c = 1) {
  Edges e{{0, 1}, {1, 2}, {0, 2}};
  return Graph({a, b, c}, e);
}

inline Graph chain(std::vector<Label> labels) {
  Edges e;
  for (VertexId v = 0; v + 1 < labels.size(); ++v) e.emplace_back(v, v + 1);
  return Graph(std::move(labels), e);
}

inline Graph star(std::size_t leaves, Label center = 1, Label leaf = 2) {
  std::vector<Label> labels{center};
  Edges e;
  for (VertexId i = 1; i <= leaves; ++i) {
    labels.push_back(leaf);
    e.emplace_back(0, i);
  }
  return Graph(labels, e);
}

/// Connected random graph: a random spanning tree plus extra edges.
inline Graph random_connected(std::size_t n, std::size_t extra, Label labels,
                              std::uint64_t seed) {
  gnnpe::Rng rng(seed);
  Edges e;
  for (VertexId v = 1; v < n; ++v) {
    e.emplace_back(static_cast<VertexId>(gnnpe::uniform_index(rng, v)), v);
  }
  for (std::size_t i = 0; i < extra; ++i) {
    auto u = static_cast<VertexId>(gnnpe::uniform_index(rng, n));
    auto v = static_cast<VertexId>(gnnpe::uniform_index(rng, n));
    if (u != v) e.emplace_back(u, v);
  }
  std::vector<Label> l(n);
  for (auto& x : l) x = static_cast<Label>(gnnpe::uniform_index(rng, labels)) + 1;
  return Graph(l, e, labels);
}

inline std::vector<VertexId> all_vertices(const Graph& g) {
  std::vector<VertexId> v(g.vertex_count());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace fixtures
