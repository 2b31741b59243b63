#include "gnnpe/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

namespace gnnpe {

namespace {

struct WeightedGraph {
  std::vector<std::int64_t> vertex_weight;
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> adj;  // sorted by neighbor
  std::size_t size() const { return vertex_weight.size(); }
};

WeightedGraph from_graph(const Graph& g) {
  WeightedGraph w;
  w.vertex_weight.assign(g.vertex_count(), 1);
  w.adj.resize(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    for (VertexId u : g.neighbors(v)) w.adj[v].emplace_back(u, 1);
  }
  return w;
}

// Heavy-edge matching. Returns the coarse graph and the fine->coarse map.
std::pair<WeightedGraph, std::vector<std::uint32_t>> coarsen(const WeightedGraph& g,
                                                             std::int64_t max_vertex_weight) {
  const std::size_t n = g.size();
  constexpr auto kUnmatched = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> match(n, kUnmatched);
  std::vector<std::uint32_t> order(n);
  for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return g.adj[a].size() < g.adj[b].size(); });
  for (auto u : order) {
    if (match[u] != kUnmatched) continue;
    std::uint32_t best = kUnmatched;
    std::int64_t best_w = -1;
    for (auto [v, w] : g.adj[u]) {
      if (match[v] != kUnmatched || v == u) continue;
      if (g.vertex_weight[u] + g.vertex_weight[v] > max_vertex_weight) continue;
      if (w > best_w) {
        best_w = w;
        best = v;
      }
    }
    if (best == kUnmatched) {
      match[u] = u;
    } else {
      match[u] = best;
      match[best] = u;
    }
  }
  std::vector<std::uint32_t> map(n, kUnmatched);
  std::uint32_t next = 0;
  for (std::uint32_t u = 0; u < n; ++u) {
    if (map[u] != kUnmatched) continue;
    map[u] = next;
    map[match[u]] = next;
    ++next;
  }
  WeightedGraph c;
  c.vertex_weight.assign(next, 0);
  c.adj.resize(next);
  std::vector<std::map<std::uint32_t, std::int64_t>> merged(next);
  for (std::uint32_t u = 0; u < n; ++u) {
    c.vertex_weight[map[u]] += g.vertex_weight[u];
    for (auto [v, w] : g.adj[u]) {
      if (map[v] != map[u]) merged[map[u]][map[v]] += w;
    }
  }
  for (std::uint32_t u = 0; u < next; ++u) {
    c.adj[u].assign(merged[u].begin(), merged[u].end());
  }
  return {std::move(c), std::move(map)};
}

std::vector<std::size_t> grow_regions(const WeightedGraph& g, std::size_t parts) {
  const std::size_t n = g.size();
  constexpr auto kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> part(n, kNone);
  std::int64_t total = 0;
  for (auto w : g.vertex_weight) total += w;
  std::int64_t assigned = 0;
  std::size_t next_seed = 0;
  for (std::size_t p = 0; p + 1 < parts; ++p) {
    const std::int64_t quota =
        (total - assigned) / static_cast<std::int64_t>(parts - p);
    std::int64_t weight = 0;
    std::vector<std::int64_t> conn(n, 0);
    std::priority_queue<std::pair<std::int64_t, std::int64_t>> frontier;  // (conn, -vertex)
    while (weight < quota) {
      if (frontier.empty()) {
        while (next_seed < n && part[next_seed] != kNone) ++next_seed;
        if (next_seed == n) break;
        frontier.emplace(0, -static_cast<std::int64_t>(next_seed));
      }
      auto [c, neg_v] = frontier.top();
      frontier.pop();
      auto v = static_cast<std::size_t>(-neg_v);
      if (part[v] != kNone || c != conn[v]) continue;
      part[v] = p;
      weight += g.vertex_weight[v];
      for (auto [u, w] : g.adj[v]) {
        if (part[u] != kNone) continue;
        conn[u] += w;
        frontier.emplace(conn[u], -static_cast<std::int64_t>(u));
      }
    }
    assigned += weight;
  }
  for (auto& p : part) {
    if (p == kNone) p = parts - 1;
  }
  return part;
}

struct Balance {
  std::int64_t min_weight;
  std::int64_t max_weight;
};

// Greedy boundary refinement: move vertices with positive gain (or zero gain
// that improves balance) while staying inside the balance window, then force
// overweight parts back under the cap.
void refine(const WeightedGraph& g, std::vector<std::size_t>& part, std::size_t parts,
            Balance bal) {
  std::vector<std::int64_t> weight(parts, 0);
  for (std::size_t v = 0; v < g.size(); ++v) weight[part[v]] += g.vertex_weight[v];
  std::vector<std::int64_t> conn(parts, 0);

  auto best_move = [&](std::size_t v, bool require_room) {
    std::vector<std::size_t> touched;
    for (auto [u, w] : g.adj[v]) {
      if (conn[part[u]] == 0) touched.push_back(part[u]);
      conn[part[u]] += w;
    }
    const std::size_t home = part[v];
    const std::int64_t home_conn = conn[home];
    std::size_t best = home;
    std::int64_t best_gain = INT64_MIN;
    for (auto p : touched) {
      if (p == home) continue;
      if (require_room && weight[p] + g.vertex_weight[v] > bal.max_weight) continue;
      std::int64_t gain = conn[p] - home_conn;
      if (gain > best_gain || (gain == best_gain && weight[p] < weight[best])) {
        best_gain = gain;
        best = p;
      }
    }
    for (auto p : touched) conn[p] = 0;
    return std::pair{best, best_gain};
  };

  for (int pass = 0; pass < 8; ++pass) {
    bool moved = false;
    for (std::size_t v = 0; v < g.size(); ++v) {
      const std::size_t home = part[v];
      if (weight[home] - g.vertex_weight[v] < bal.min_weight) continue;
      auto [to, gain] = best_move(v, true);
      if (to == home) continue;
      const bool improves_balance = weight[home] > weight[to] + g.vertex_weight[v];
      if (gain > 0 || (gain == 0 && improves_balance)) {
        weight[home] -= g.vertex_weight[v];
        weight[to] += g.vertex_weight[v];
        part[v] = to;
        moved = true;
      }
    }
    if (!moved) break;
  }

  for (std::size_t round = 0; round < 4 * g.size(); ++round) {
    std::size_t heavy = 0;
    for (std::size_t p = 1; p < parts; ++p) {
      if (weight[p] > weight[heavy]) heavy = p;
    }
    if (weight[heavy] <= bal.max_weight) break;
    std::size_t light = 0;
    for (std::size_t p = 1; p < parts; ++p) {
      if (weight[p] < weight[light]) light = p;
    }
    // Prefer a boundary vertex; fall back to any vertex, moved to the lightest part.
    std::size_t pick = g.size(), to = light;
    std::int64_t pick_gain = INT64_MIN;
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (part[v] != heavy) continue;
      auto [dest, gain] = best_move(v, true);
      if (dest != heavy && gain > pick_gain) {
        pick_gain = gain;
        pick = v;
        to = dest;
      }
    }
    if (pick == g.size()) {
      for (std::size_t v = 0; v < g.size(); ++v) {
        if (part[v] == heavy) {
          pick = v;
          to = light;
          break;
        }
      }
    }
    weight[heavy] -= g.vertex_weight[pick];
    weight[to] += g.vertex_weight[pick];
    part[pick] = to;
  }
}

}  // namespace

std::vector<Partition> partition_graph(const Graph& g, std::size_t target_size) {
  if (target_size == 0) throw GraphError("partition target size must be positive");
  const std::size_t n = g.vertex_count();
  const std::size_t parts = std::max<std::size_t>(1, (n + target_size - 1) / target_size);
  std::vector<std::size_t> assignment(n, 0);
  if (parts > 1) {
    const double ideal = static_cast<double>(n) / static_cast<double>(parts);
    const std::int64_t max_coarse_weight =
        std::max<std::int64_t>(1, static_cast<std::int64_t>(ideal / 8.0));

    std::vector<WeightedGraph> levels{from_graph(g)};
    std::vector<std::vector<std::uint32_t>> maps;
    const std::size_t stop_size = std::max<std::size_t>(64, 16 * parts);
    while (levels.back().size() > stop_size) {
      auto [coarse, map] = coarsen(levels.back(), max_coarse_weight);
      if (coarse.size() * 10 > levels.back().size() * 9) break;
      levels.push_back(std::move(coarse));
      maps.push_back(std::move(map));
    }

    auto part = grow_regions(levels.back(), parts);
    for (std::size_t lvl = levels.size(); lvl-- > 0;) {
      const auto& wg = levels[lvl];
      std::int64_t max_vw = *std::max_element(wg.vertex_weight.begin(), wg.vertex_weight.end());
      Balance bal{static_cast<std::int64_t>(std::floor(ideal * 0.9)) - max_vw,
                  static_cast<std::int64_t>(std::ceil(ideal * 1.1)) + max_vw};
      refine(wg, part, parts, bal);
      if (lvl > 0) {
        const auto& map = maps[lvl - 1];
        std::vector<std::size_t> finer(map.size());
        for (std::size_t v = 0; v < map.size(); ++v) finer[v] = part[map[v]];
        part = std::move(finer);
      }
    }
    assignment = std::move(part);
  }
  return partitions_from_assignment(g, assignment);
}

std::vector<std::size_t> assignment_of(const std::vector<Partition>& parts, std::size_t n) {
  std::vector<std::size_t> a(n, 0);
  for (const auto& p : parts) {
    for (auto v : p.core_vertices) a[v] = p.id;
  }
  return a;
}

std::vector<Partition> partitions_from_assignment(const Graph& g,
                                                  const std::vector<std::size_t>& assignment) {
  if (assignment.size() != g.vertex_count()) {
    throw GraphError("partition assignment does not cover every vertex");
  }
  std::size_t parts = 0;
  for (auto p : assignment) parts = std::max(parts, p + 1);
  std::vector<Partition> out(parts);
  for (std::size_t p = 0; p < parts; ++p) out[p].id = p;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    out[assignment[v]].core_vertices.push_back(v);
    for (VertexId u : g.neighbors(v)) {
      if (assignment[u] != assignment[v]) out[assignment[v]].cut_edges.emplace_back(v, u);
    }
  }
  return out;
}

std::size_t cut_size(const Graph& g, const std::vector<std::size_t>& assignment) {
  std::size_t cut = 0;
  for (auto [u, v] : g.edges()) {
    if (assignment[u] != assignment[v]) ++cut;
  }
  return cut;
}

std::ptrdiff_t ExpandedPartition::local_id(VertexId global) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), global);
  if (it == vertices.end() || *it != global) return -1;
  return it - vertices.begin();
}

ExpandedPartition expand(const Graph& g, const Partition& p, std::size_t hops) {
  ExpandedPartition e;
  e.id = p.id;
  e.core_vertices = p.core_vertices;
  std::vector<std::size_t> dist(g.vertex_count(), SIZE_MAX);
  std::queue<VertexId> frontier;
  for (auto v : p.core_vertices) {
    dist[v] = 0;
    frontier.push(v);
  }
  while (!frontier.empty()) {
    auto u = frontier.front();
    frontier.pop();
    if (dist[u] == hops) continue;
    for (auto w : g.neighbors(u)) {
      if (dist[w] != SIZE_MAX) continue;
      dist[w] = dist[u] + 1;
      e.halo_vertices.push_back(w);
      frontier.push(w);
    }
  }
  std::sort(e.halo_vertices.begin(), e.halo_vertices.end());
  std::merge(e.core_vertices.begin(), e.core_vertices.end(), e.halo_vertices.begin(),
             e.halo_vertices.end(), std::back_inserter(e.vertices));

  std::vector<Label> labels(e.vertices.size());
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (std::size_t i = 0; i < e.vertices.size(); ++i) {
    labels[i] = g.label(e.vertices[i]);
    for (auto w : g.neighbors(e.vertices[i])) {
      auto j = e.local_id(w);
      if (j > static_cast<std::ptrdiff_t>(i)) {
        edges.emplace_back(static_cast<VertexId>(i), static_cast<VertexId>(j));
      }
    }
  }
  e.induced = Graph(std::move(labels), edges, g.label_domain_size());
  return e;
}

std::string format_assignment(const std::vector<std::size_t>& assignment) {
  std::string out;
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    out += std::to_string(v) + " " + std::to_string(assignment[v]) + "\n";
  }
  return out;
}

std::vector<std::size_t> parse_assignment(const std::string& text, std::size_t vertex_count) {
  std::vector<std::size_t> a(vertex_count, SIZE_MAX);
  std::istringstream in(text);
  std::size_t v, p;
  std::size_t lines = 0;
  while (in >> v >> p) {
    if (v >= vertex_count || a[v] != SIZE_MAX) {
      throw GraphError("partition file: bad or duplicate vertex " + std::to_string(v));
    }
    a[v] = p;
    ++lines;
  }
  if (!in.eof()) throw GraphError("partition file: malformed line");
  if (lines != vertex_count) throw GraphError("partition file does not cover every vertex");
  return a;
}

}  // namespace gnnpe
