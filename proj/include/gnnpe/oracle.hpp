#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "gnnpe/graph.hpp"

namespace gnnpe {

/// Query vertex i maps to data vertex mapping[i].
using Mapping = std::vector<VertexId>;

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleStats {
  std::uint64_t nodes = 0;  // recursion nodes expanded
  std::uint64_t matches = 0;
};

/// Injective, label-preserving, edge-preserving?
bool is_embedding(const Graph& q, const Graph& g, const Mapping& m);

/// Every subgraph isomorphism of q into g, sorted. Plain backtracking with a
/// label and degree filter. Throws BudgetExceeded after `budget` nodes
/// (0 = unlimited).
std::vector<Mapping> oracle_match(const Graph& q, const Graph& g, std::uint64_t budget = 0,
                                  OracleStats* stats = nullptr);

/// Backtracking order: highest degree (smallest id on ties) first, then
/// repeatedly the highest-degree vertex adjacent to those already ordered.
std::vector<VertexId> oracle_order(const Graph& q);

/// Data paths p (simple, same length, sorted) such that at every position
/// the labels agree and the neighbor labels of the query vertex in q form a
/// sub-multiset of those of the data vertex in g.
std::vector<Path> oracle_path_matches(const Graph& q, std::span<const VertexId> query_path,
                                      const Graph& g, std::uint64_t budget = 0);

/// Neighbor-label multiset containment of q's star at u in g's star at v.
bool star_contained(const Graph& q, VertexId u, const Graph& g, VertexId v);

}  // namespace gnnpe
