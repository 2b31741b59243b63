#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnnpe/gnn.hpp"
#include "gnnpe/graph.hpp"
#include "gnnpe/oracle.hpp"
#include "gnnpe/partition.hpp"
#include "gnnpe/path_index.hpp"
#include "gnnpe/planner.hpp"

namespace gnnpe {

struct StoreOptions {
  EmbedderConfig embedder;
  std::size_t length = 2;            // l
  std::size_t partition_size = 10000;
  IndexParams index;
  std::uint64_t seed = 1;
};

/// Offline artifacts of one partition. Paths are anchored at core vertices,
/// so every data path is indexed by exactly one partition.
struct PartitionArtifacts {
  ExpandedPartition expanded;
  TrainedEmbedder embedder;
  ARTree index;
};

struct Store {
  Graph graph;
  std::size_t length = 2;
  std::vector<Partition> partitions;
  std::vector<PartitionArtifacts> parts;

  std::size_t indexed_paths() const;
  /// Same artifacts with every embedder truncated to n auxiliary models and
  /// the path records rebuilt accordingly.
  Store with_auxiliary_count(std::size_t n) const;
};

/// Training seed of partition j.
std::uint64_t partition_seed(std::uint64_t seed, std::size_t partition);

/// Expanded partition, embedder and index for one partition.
PartitionArtifacts build_partition(const Graph& g, const Partition& p, std::size_t length,
                                   const TrainedEmbedder& embedder, const IndexParams& params);

/// Partitions g, trains every partition's embedder and builds its index;
/// partitions are processed concurrently.
Store build_store(const Graph& g, const StoreOptions& options);

struct MatchOptions {
  PlanOptions plan;
  WeightMode weight = WeightMode::kDegree;
};

struct MatchOutcome {
  std::vector<Mapping> matches;  // sorted, deduplicated
  QueryPlan plan;
  std::vector<std::size_t> candidates;  // per plan path, all partitions
  std::size_t paths_scanned = 0;
  std::size_t vertices_fallback = 0;    // candidate vertices in fallback mode
  double plan_ms = 0.0, filter_ms = 0.0, refine_ms = 0.0;
};

/// Query path records for every plan path, per partition.
std::vector<std::vector<QueryPathRecord>> embed_query(const Graph& q, const QueryPlan& plan,
                                                      const Store& store);

/// Per plan path, candidate data paths (merged across partitions).
using CandidateSet = std::vector<std::vector<Path>>;

/// Left-deep hash join on shared query vertices, smallest list first;
/// enforces injectivity and every query edge. Output sorted, deduplicated
/// and re-verified.
std::vector<Mapping> join_candidates(const QueryPlan& plan, const CandidateSet& cands,
                                     const Graph& q, const Graph& g);

/// Plan, embed, traverse every partition, join.
MatchOutcome match(const Graph& q, const Store& store, const MatchOptions& options = {});

/// `m q0-><v> q1-><v> ...`
std::string format_mapping(const Mapping& m);

}  // namespace gnnpe
