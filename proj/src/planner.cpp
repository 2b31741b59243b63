#include "gnnpe/planner.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "gnnpe/random.hpp"

namespace gnnpe {

double path_weight_deg(const Graph& q, std::span<const VertexId> p) {
  double s = 0.0;
  for (VertexId v : p) s -= static_cast<double>(q.degree(v));
  return s;
}

VertexId plan_start_vertex(const Graph& q) {
  VertexId best = 0;
  for (VertexId v = 1; v < q.vertex_count(); ++v) {
    if (q.degree(v) > q.degree(best)) best = v;
  }
  return best;
}

namespace {

struct Candidate {
  std::vector<VertexId> vertices;
  double weight;
};

bool contains(const std::vector<VertexId>& p, VertexId v) {
  return std::find(p.begin(), p.end(), v) != p.end();
}

void finish(const Graph& q, QueryPlan& plan) {
  plan.cost = 0.0;
  for (double w : plan.weights) plan.cost += w;
  plan.overlaps.clear();
  for (std::size_t i = 0; i < plan.paths.size(); ++i) {
    for (std::size_t j = i + 1; j < plan.paths.size(); ++j) {
      std::vector<VertexId> shared;
      for (VertexId v : plan.paths[i]) {
        if (contains(plan.paths[j], v)) shared.push_back(v);
      }
      std::sort(shared.begin(), shared.end());
      if (!shared.empty()) plan.overlaps[{i, j}] = std::move(shared);
    }
  }
  std::set<std::pair<VertexId, VertexId>> on_path;
  for (const auto& p : plan.paths) {
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      on_path.insert(std::minmax(p[k], p[k + 1]));
    }
  }
  plan.residual_edges.clear();
  for (const auto& e : q.edges()) {
    if (!on_path.count(e)) plan.residual_edges.push_back(e);
  }
}

QueryPlan grow(const Graph& q, const std::vector<Candidate>& all, std::size_t seed_index,
               std::size_t length) {
  QueryPlan plan;
  plan.length = length;
  std::vector<char> covered(q.vertex_count(), 0);
  std::size_t left = q.vertex_count();
  auto take = [&](std::size_t i) {
    plan.paths.push_back(all[i].vertices);
    plan.weights.push_back(all[i].weight);
    for (VertexId v : all[i].vertices) {
      if (!covered[v]) {
        covered[v] = 1;
        --left;
      }
    }
  };
  take(seed_index);
  while (left > 0) {
    std::size_t best = all.size();
    std::size_t best_overlap = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < all.size(); ++i) {
      std::size_t overlap = 0, fresh = 0;
      for (VertexId v : all[i].vertices) (covered[v] ? overlap : fresh)++;
      if (overlap == 0 || fresh == 0) continue;
      // Candidates are sorted by vertex sequence, so the first of equal
      // (overlap, weight) is also the lexicographically smallest.
      if (best == all.size() || overlap < best_overlap ||
          (overlap == best_overlap && all[i].weight < all[best].weight)) {
        best = i;
        best_overlap = overlap;
      }
    }
    if (best == all.size()) {
      // q is connected, so some path touching the covered set always adds a
      // vertex; keep a guard anyway.
      for (std::size_t i = 0; i < all.size() && best == all.size(); ++i) {
        for (VertexId v : all[i].vertices) {
          if (!covered[v]) {
            best = i;
            break;
          }
        }
      }
      if (best == all.size()) break;
    }
    take(best);
  }
  finish(q, plan);
  return plan;
}

}  // namespace

QueryPlan select_plan(const Graph& q, std::size_t length, const PathWeightFn& weight,
                      const PlanOptions& options) {
  if (q.vertex_count() == 0) throw GraphError("select_plan: empty query");
  std::vector<VertexId> anchors(q.vertex_count());
  std::iota(anchors.begin(), anchors.end(), 0);
  std::size_t use = length;
  std::vector<Path> paths = enumerate_paths(q, anchors, use);
  while (paths.empty() && use > 0) {
    --use;
    paths = enumerate_paths(q, anchors, use);
  }
  std::vector<Candidate> all;
  all.reserve(paths.size());
  for (auto& p : paths) {
    const double w = weight(p.vertices);
    all.push_back(Candidate{std::move(p.vertices), w});
  }
  std::sort(all.begin(), all.end(),
            [](const Candidate& a, const Candidate& b) { return a.vertices < b.vertices; });

  const VertexId start = plan_start_vertex(q);
  std::vector<std::size_t> through;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (contains(all[i].vertices, start)) through.push_back(i);
  }

  std::vector<std::size_t> seeds;
  switch (options.strategy) {
    case PlanStrategy::kOne: {
      std::size_t best = through.front();
      for (std::size_t i : through) {
        if (all[i].weight < all[best].weight) best = i;
      }
      seeds.push_back(best);
      break;
    }
    case PlanStrategy::kAll:
      seeds = through;
      break;
    case PlanStrategy::kEpsilon: {
      seeds = through;
      Rng rng(options.seed);
      shuffle(std::span<std::size_t>(seeds), rng);
      seeds.resize(std::min(seeds.size(), std::max<std::size_t>(options.epsilon, 1)));
      std::sort(seeds.begin(), seeds.end());
      break;
    }
  }

  QueryPlan best;
  bool have = false;
  for (std::size_t s : seeds) {
    QueryPlan p = grow(q, all, s, use);
    if (!have || p.cost < best.cost) {
      best = std::move(p);
      have = true;
    }
  }
  best.fallback = use != length;
  return best;
}

QueryPlan select_plan(const Graph& q, std::size_t length, const PlanOptions& options) {
  return select_plan(
      q, length, [&](std::span<const VertexId> p) { return path_weight_deg(q, p); }, options);
}

std::string format_plan(const QueryPlan& plan) {
  std::ostringstream out;
  auto num = [](double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  for (std::size_t i = 0; i < plan.paths.size(); ++i) {
    out << 'p';
    for (VertexId v : plan.paths[i]) out << ' ' << v;
    out << " w=" << num(plan.weights[i]) << '\n';
  }
  for (const auto& [u, v] : plan.residual_edges) out << "residual " << u << ' ' << v << '\n';
  out << "cost=" << num(plan.cost) << '\n';
  return out.str();
}

std::string check_plan(const Graph& q, const QueryPlan& plan) {
  std::ostringstream err;
  if (plan.paths.empty()) return "no paths";
  if (plan.weights.size() != plan.paths.size()) err << "weights/paths size mismatch; ";
  std::vector<char> covered(q.vertex_count(), 0);
  std::set<std::pair<VertexId, VertexId>> on_path;
  double cost = 0.0;
  for (std::size_t i = 0; i < plan.paths.size(); ++i) {
    const auto& p = plan.paths[i];
    if (p.size() != plan.length + 1) err << "path " << i << " has wrong length; ";
    std::set<VertexId> distinct(p.begin(), p.end());
    if (distinct.size() != p.size()) err << "path " << i << " is not simple; ";
    bool touches = i == 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] >= q.vertex_count()) {
        err << "path " << i << " leaves q; ";
        return err.str();
      }
      if (covered[p[k]]) touches = true;
      if (k + 1 < p.size()) {
        if (!q.has_edge(p[k], p[k + 1])) err << "path " << i << " uses a non-edge; ";
        on_path.insert(std::minmax(p[k], p[k + 1]));
      }
    }
    if (!touches) err << "path " << i << " is disconnected from earlier paths; ";
    for (VertexId v : p) covered[v] = 1;
    if (i < plan.weights.size()) cost += plan.weights[i];
  }
  for (VertexId v = 0; v < q.vertex_count(); ++v) {
    if (!covered[v]) err << "vertex " << v << " uncovered; ";
  }
  if (cost != plan.cost) err << "cost is not the sum of weights; ";
  std::set<std::pair<VertexId, VertexId>> residual(plan.residual_edges.begin(),
                                                   plan.residual_edges.end());
  for (const auto& e : q.edges()) {
    if (!on_path.count(e) && !residual.count(e)) err << "edge dropped from the plan; ";
  }
  return err.str();
}

}  // namespace gnnpe
