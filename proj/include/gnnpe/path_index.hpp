#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnnpe/gnn.hpp"
#include "gnnpe/graph.hpp"

namespace gnnpe {

/// a ⪯ b: a[t] <= b[t] for every t. Throws std::invalid_argument on a
/// length mismatch.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Sum of |x[t]| in index order.
double l1_norm(std::span<const double> x);

/// A data path with its concatenated embeddings, blocks in path order.
struct PathRecord {
  Path path;
  std::size_t partition = 0;
  Embedding primary;                 // (l+1)·d
  std::vector<Embedding> auxiliary;  // n × (l+1)·d
  Embedding label;                   // (l+1)·d
};

/// A query path embedded with one partition's models.
struct QueryPathRecord {
  std::vector<VertexId> query_vertices;
  Embedding primary;
  std::vector<Embedding> auxiliary;
  Embedding label;
  /// False when some label is unknown to the partition; nothing can match.
  bool matchable = true;
};

PathRecord make_path_record(const TrainedEmbedder& t, const Graph& g, const Path& p,
                            std::size_t partition);

/// Embeds a query path; each vertex's star is taken from q itself.
QueryPathRecord make_query_record(const TrainedEmbedder& t, const Graph& q,
                                  std::span<const VertexId> query_path);

/// Records passing path label pruning (exact o₀ equality) and path
/// dominance pruning on the primary and every auxiliary embedding. Indices
/// ascending.
std::vector<std::uint32_t> linear_scan_candidates(std::span<const PathRecord> records,
                                                  const QueryPathRecord& q);
bool record_survives(const PathRecord& r, const QueryPathRecord& q);

/// Linear scan for a batch of queries; the OpenMP version splits the record
/// range and must agree exactly with the serial one.
std::vector<std::vector<std::uint32_t>> linear_scan_serial(std::span<const PathRecord> records,
                                                           std::span<const QueryPathRecord> qs);
std::vector<std::vector<std::uint32_t>> linear_scan_parallel(std::span<const PathRecord> records,
                                                             std::span<const QueryPathRecord> qs);

struct IndexParams {
  std::size_t max_fanout = 64;
  double min_fill = 0.4;
  double reinsert_fraction = 0.3;
};

/// Axis-aligned box over every embedding family of a record, laid out as
/// [primary | auxiliary 0 .. n-1 | label] blocks of equal width.
struct Box {
  std::vector<double> lo, hi;
};

struct TraversalStats {
  std::size_t nodes_visited = 0;
  std::size_t records_compared = 0;
};

/// Aggregate R*-tree: an R*-tree over primary path embeddings whose entries
/// also carry the MBRs of the auxiliary and label embeddings.
class ARTree {
 public:
  struct Entry {
    Box box;
    std::uint32_t child = 0;  // node id, or record index in a leaf
  };
  struct Node {
    std::uint32_t level = 0;  // 0 = leaf
    std::vector<Entry> entries;
  };

  ARTree() = default;
  /// Empty tree for records with `block_dim` = (l+1)·d and n auxiliary blocks.
  ARTree(std::size_t block_dim, std::size_t auxiliary, IndexParams params = {});

  /// Repeated R* insertion of every record, in order.
  static ARTree build(std::vector<PathRecord> records, IndexParams params = {});

  void insert(PathRecord record);

  const std::vector<PathRecord>& records() const { return records_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::uint32_t root() const { return root_; }
  std::size_t height() const { return nodes_.empty() ? 0 : nodes_[root_].level + 1; }
  std::size_t block_dim() const { return block_; }
  std::size_t auxiliary_count() const { return aux_; }
  const IndexParams& params() const { return params_; }
  std::size_t min_entries() const { return min_entries_; }

  /// Checks that every entry's box equals the exact bound of its subtree,
  /// levels are consistent, fanouts are within bounds, and every record is
  /// reachable exactly once. Returns an empty string when sound.
  std::string audit() const;

  /// Single best-first pass answering every query; per-query record indices
  /// ascending. Equivalent to linear_scan_candidates for each query.
  std::vector<std::vector<std::uint32_t>> traverse(std::span<const QueryPathRecord> queries,
                                                   TraversalStats* stats = nullptr) const;

  std::string serialize(std::size_t partition, std::size_t length) const;
  static ARTree deserialize(const std::string& text);

 private:
  Box point_box(const PathRecord& r) const;
  Box bound(std::uint32_t node) const;
  std::vector<std::pair<std::uint32_t, std::size_t>> choose_path(const Box& box,
                                                                 std::uint32_t level) const;
  void insert_entry(Entry e, std::uint32_t level, std::vector<char>& reinserted,
                    std::vector<std::pair<Entry, std::uint32_t>>& pending);
  std::uint32_t split(std::uint32_t node);

  std::size_t block_ = 0, aux_ = 0, total_ = 0;
  IndexParams params_;
  std::size_t min_entries_ = 2;
  std::vector<PathRecord> records_;
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
};

}  // namespace gnnpe
