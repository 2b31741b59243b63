#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gnnpe {

using VertexId = std::uint32_t;
using Label = std::uint32_t;

/// Raised for malformed graph files and violated graph invariants.
class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Undirected vertex-labeled simple graph with sorted adjacency lists.
///
/// Labels live in [1, label_domain_size()]. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an edge list. Duplicate edges (in either
  /// orientation) are merged; self-loops and dangling ids throw GraphError.
  /// A zero `label_domain_size` means "use the largest label present".
  Graph(std::vector<Label> labels, std::span<const std::pair<VertexId, VertexId>> edges,
        Label label_domain_size = 0);

  std::size_t vertex_count() const { return labels_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  Label label_domain_size() const { return label_domain_size_; }

  Label label(VertexId v) const { return labels_[v]; }
  const std::vector<Label>& labels() const { return labels_; }
  std::span<const VertexId> neighbors(VertexId v) const { return adjacency_[v]; }
  std::size_t degree(VertexId v) const { return adjacency_[v].size(); }
  bool has_edge(VertexId u, VertexId v) const;
  double average_degree() const;

  /// Every undirected edge once, as (u, v) with u < v, in ascending order.
  std::vector<std::pair<VertexId, VertexId>> edges() const;

  bool is_connected() const;

 private:
  std::vector<Label> labels_;
  std::vector<std::vector<VertexId>> adjacency_;
  std::size_t edge_count_ = 0;
  Label label_domain_size_ = 0;
};

using DataGraph = Graph;

/// A connected graph with at least one vertex, used as a matching pattern.
class QueryGraph : public Graph {
 public:
  QueryGraph() = default;
  explicit QueryGraph(Graph g);
};

/// Center vertex plus its 1-hop neighbors (sorted by vertex id).
struct StarGraph {
  VertexId center = 0;
  Label center_label = 0;
  std::vector<std::pair<VertexId, Label>> neighbors;
};

/// Center plus a subset of its parent star's neighbors; an empty subset is
/// the isolated-vertex substructure.
struct StarSubstructure {
  VertexId center = 0;
  Label center_label = 0;
  std::vector<std::pair<VertexId, Label>> neighbors;
};

/// Simple path; vertices.size() == length + 1.
struct Path {
  std::vector<VertexId> vertices;
  std::size_t length() const { return vertices.empty() ? 0 : vertices.size() - 1; }
  friend bool operator==(const Path&, const Path&) = default;
  friend auto operator<=>(const Path&, const Path&) = default;
};

/// Parses the `t / v / e` text format.
Graph parse_graph(std::string_view text);
Graph read_graph_file(const std::string& path);

/// Serializes in the same format parse_graph accepts (edges with u < v).
std::string format_graph(const Graph& g);
void write_graph_file(const Graph& g, const std::string& path);

StarGraph extract_unit_star(const Graph& g, VertexId v);

/// All 2^deg subsets of the star's neighbors in increasing bitmask order,
/// bit i selecting the i-th neighbor. Throws if the degree exceeds theta.
std::vector<StarSubstructure> enumerate_substructures(const StarGraph& star, std::size_t theta);

/// Every directed simple path with `length` edges whose first vertex is an
/// anchor. Anchors are visited in the given order, neighbors ascending.
std::vector<Path> enumerate_paths(const Graph& g, std::span<const VertexId> anchors,
                                  std::size_t length);

/// Seeded permutation of [1, domain]; entry i is the image of label i
/// (entry 0 unused). Seed 0 yields the identity.
std::vector<Label> label_permutation(Label domain, std::uint64_t seed);

/// Same structure with labels remapped through label_permutation(seed).
Graph randomize_labels(const Graph& g, std::uint64_t seed);

struct SampledQuery {
  QueryGraph graph;
  /// Data vertex each query vertex was sampled from (a planted match).
  std::vector<VertexId> source_vertices;
};

/// Random-walk query sampling. Walks until `vertex_count` distinct vertices
/// are seen, then deletes random non-bridge edges of the induced subgraph
/// until the edge count is floor(avg_degree * vertex_count / 2). Restarts
/// from a new vertex when the induced subgraph is too sparse; gives up with
/// GraphError after `max_restarts` restarts.
SampledQuery sample_query_graph(const Graph& g, std::size_t vertex_count, double avg_degree,
                                std::uint64_t seed, std::size_t max_restarts = 100);

}  // namespace gnnpe
