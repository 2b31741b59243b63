#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gnnpe/graph.hpp"

namespace gnnpe {

enum class PlanStrategy { kOne, kAll, kEpsilon };  // OIP, AIP, εIP
enum class WeightMode { kDegree, kDominance };

/// Weight of one query path; lower is better.
using PathWeightFn = std::function<double(std::span<const VertexId>)>;

struct QueryPlan {
  std::size_t length = 0;  // path length actually used
  std::vector<std::vector<VertexId>> paths;
  std::vector<double> weights;
  double cost = 0.0;
  /// Shared query vertices of every path pair (i < j) that overlaps.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<VertexId>> overlaps;
  /// Query edges (u < v) on no plan path.
  std::vector<std::pair<VertexId, VertexId>> residual_edges;
  /// Set when q has no simple path of the requested length.
  bool fallback = false;
};

struct PlanOptions {
  PlanStrategy strategy = PlanStrategy::kOne;
  std::size_t epsilon = 3;
  std::uint64_t seed = 7;
};

/// -(sum of query degrees along p).
double path_weight_deg(const Graph& q, std::span<const VertexId> p);

/// Greedy vertex cover of q by simple length-l paths. Seeds are the paths
/// through the highest-degree vertex (one, all, or ε sampled); each seed is
/// extended by the connected path with the fewest already-covered vertices,
/// then the lowest weight, then the smallest vertex sequence. The cheapest
/// resulting plan wins. Falls back to the longest length q supports.
QueryPlan select_plan(const Graph& q, std::size_t length, const PathWeightFn& weight,
                      const PlanOptions& options = {});
QueryPlan select_plan(const Graph& q, std::size_t length, const PlanOptions& options = {});

/// Start vertex: highest degree, smallest id on ties.
VertexId plan_start_vertex(const Graph& q);

/// `p <ids> w=<weight>` lines, `residual <u> <v>` lines, `cost=<value>`.
std::string format_plan(const QueryPlan& plan);

/// Checks coverage, path validity, join connectivity, cost and residual
/// bookkeeping. Empty string when valid.
std::string check_plan(const Graph& q, const QueryPlan& plan);

}  // namespace gnnpe
