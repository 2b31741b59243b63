#pragma once

#include <string>
#include <vector>

#include "gnnpe/graph.hpp"

namespace gnnpe {

struct Partition {
  std::size_t id = 0;
  std::vector<VertexId> core_vertices;  // sorted
  std::vector<std::pair<VertexId, VertexId>> cut_edges;  // (inside, outside)
};

/// A partition's core plus every vertex within `hops` of it, with the
/// induced subgraph over that vertex set in local ids.
struct ExpandedPartition {
  std::size_t id = 0;
  std::vector<VertexId> core_vertices;
  std::vector<VertexId> halo_vertices;  // sorted
  std::vector<VertexId> vertices;       // core ∪ halo, sorted; local id = index
  Graph induced;

  /// Local id of a global vertex, or -1 when outside the expansion.
  std::ptrdiff_t local_id(VertexId global) const;
};

/// Multilevel min-cut partitioning into ceil(|V| / target_size) balanced
/// parts: heavy-edge matching coarsening, BFS region growing on the coarsest
/// graph, then boundary refinement while projecting back. Deterministic.
std::vector<Partition> partition_graph(const Graph& g, std::size_t target_size);

/// Partition id per vertex.
std::vector<std::size_t> assignment_of(const std::vector<Partition>& parts, std::size_t n);
std::vector<Partition> partitions_from_assignment(const Graph& g,
                                                  const std::vector<std::size_t>& assignment);
std::size_t cut_size(const Graph& g, const std::vector<std::size_t>& assignment);

ExpandedPartition expand(const Graph& g, const Partition& p, std::size_t hops);

/// `<vertex-id> <partition-id>` per line.
std::string format_assignment(const std::vector<std::size_t>& assignment);
std::vector<std::size_t> parse_assignment(const std::string& text, std::size_t vertex_count);

}  // namespace gnnpe
