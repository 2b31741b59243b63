#include "gnnpe/oracle.hpp"

#include <algorithm>
#include <limits>

namespace gnnpe {

bool is_embedding(const Graph& q, const Graph& g, const Mapping& m) {
  if (m.size() != q.vertex_count()) return false;
  for (VertexId u = 0; u < q.vertex_count(); ++u) {
    if (m[u] >= g.vertex_count() || q.label(u) != g.label(m[u])) return false;
  }
  std::vector<VertexId> sorted(m);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  for (const auto& [a, b] : q.edges()) {
    if (!g.has_edge(m[a], m[b])) return false;
  }
  return true;
}

std::vector<VertexId> oracle_order(const Graph& q) {
  const std::size_t n = q.vertex_count();
  std::vector<VertexId> order;
  std::vector<char> placed(n, 0), frontier(n, 0);
  auto better = [&](VertexId a, VertexId b) {
    return q.degree(a) > q.degree(b) || (q.degree(a) == q.degree(b) && a < b);
  };
  while (order.size() < n) {
    VertexId pick = static_cast<VertexId>(n);
    // Prefer the frontier; fall back to any vertex for disconnected q.
    for (int pass = 0; pass < 2 && pick == n; ++pass) {
      for (VertexId v = 0; v < n; ++v) {
        if (placed[v] || (pass == 0 && !frontier[v])) continue;
        if (pick == n || better(v, pick)) pick = v;
      }
    }
    placed[pick] = 1;
    order.push_back(pick);
    for (VertexId w : q.neighbors(pick)) frontier[w] = 1;
  }
  return order;
}

std::vector<Mapping> oracle_match(const Graph& q, const Graph& g, std::uint64_t budget,
                                  OracleStats* stats) {
  OracleStats st;
  std::vector<Mapping> out;
  const std::size_t n = q.vertex_count();
  if (n == 0) {
    if (stats) *stats = st;
    return out;
  }
  const auto order = oracle_order(q);
  constexpr VertexId kNone = std::numeric_limits<VertexId>::max();
  Mapping m(n, kNone);
  std::vector<char> used(g.vertex_count(), 0);

  auto feasible = [&](VertexId u, VertexId v) {
    if (used[v] || g.label(v) != q.label(u) || g.degree(v) < q.degree(u)) return false;
    for (VertexId w : q.neighbors(u)) {
      if (m[w] != kNone && !g.has_edge(v, m[w])) return false;
    }
    return true;
  };

  auto rec = [&](auto&& self, std::size_t depth) -> void {
    if (budget && st.nodes >= budget) throw BudgetExceeded("oracle: node budget exceeded");
    ++st.nodes;
    if (depth == n) {
      out.push_back(m);
      ++st.matches;
      return;
    }
    const VertexId u = order[depth];
    VertexId anchor = kNone;
    for (VertexId w : q.neighbors(u)) {
      if (m[w] != kNone) {
        anchor = m[w];
        break;
      }
    }
    auto attempt = [&](VertexId v) {
      if (!feasible(u, v)) return;
      m[u] = v;
      used[v] = 1;
      self(self, depth + 1);
      used[v] = 0;
      m[u] = kNone;
    };
    if (anchor != kNone) {
      for (VertexId v : g.neighbors(anchor)) attempt(v);
    } else {
      for (VertexId v = 0; v < g.vertex_count(); ++v) attempt(v);
    }
  };
  rec(rec, 0);
  std::sort(out.begin(), out.end());
  if (stats) *stats = st;
  return out;
}

bool star_contained(const Graph& q, VertexId u, const Graph& g, VertexId v) {
  if (q.label(u) != g.label(v) || q.degree(u) > g.degree(v)) return false;
  std::vector<Label> a, b;
  for (VertexId w : q.neighbors(u)) a.push_back(q.label(w));
  for (VertexId w : g.neighbors(v)) b.push_back(g.label(w));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<Path> oracle_path_matches(const Graph& q, std::span<const VertexId> query_path,
                                      const Graph& g, std::uint64_t budget) {
  std::vector<Path> out;
  if (query_path.empty()) return out;
  std::uint64_t nodes = 0;
  Path cur;
  std::vector<char> on(g.vertex_count(), 0);
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (budget && nodes >= budget) throw BudgetExceeded("oracle: node budget exceeded");
    ++nodes;
    if (pos == query_path.size()) {
      out.push_back(cur);
      return;
    }
    auto attempt = [&](VertexId v) {
      if (on[v] || !star_contained(q, query_path[pos], g, v)) return;
      on[v] = 1;
      cur.vertices.push_back(v);
      self(self, pos + 1);
      cur.vertices.pop_back();
      on[v] = 0;
    };
    if (pos == 0) {
      for (VertexId v = 0; v < g.vertex_count(); ++v) attempt(v);
    } else {
      for (VertexId v : g.neighbors(cur.vertices.back())) attempt(v);
    }
  };
  rec(rec, 0);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gnnpe
