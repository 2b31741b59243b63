#include "gnnpe/matcher.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <exception>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "gnnpe/random.hpp"

namespace gnnpe {

namespace {

constexpr VertexId kNone = std::numeric_limits<VertexId>::max();

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

struct KeyHash {
  std::size_t operator()(const std::vector<VertexId>& k) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (VertexId v : k) {
      h ^= v;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

// Runs body(i) for i in [0, n) under OpenMP and rethrows the first failure.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(gnnpe_parallel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<PathRecord> records_for(const Graph& g, const ExpandedPartition& ep,
                                    std::size_t length, const TrainedEmbedder& t) {
  const auto paths = enumerate_paths(g, ep.core_vertices, length);
  std::vector<PathRecord> records;
  records.reserve(paths.size());
  for (const auto& p : paths) records.push_back(make_path_record(t, g, p, ep.id));
  return records;
}

}  // namespace

std::size_t Store::indexed_paths() const {
  std::size_t s = 0;
  for (const auto& p : parts) s += p.index.records().size();
  return s;
}

Store Store::with_auxiliary_count(std::size_t n) const {
  Store s;
  s.graph = graph;
  s.length = length;
  s.partitions = partitions;
  s.parts.resize(parts.size());
  parallel_for(parts.size(), [&](std::size_t j) {
    const auto& src = parts[j];
    auto& dst = s.parts[j];
    dst.expanded = src.expanded;
    dst.embedder = src.embedder.with_auxiliary_count(n);
    std::vector<PathRecord> records = src.index.records();
    for (auto& r : records) r.auxiliary.resize(std::min(n, r.auxiliary.size()));
    dst.index = ARTree::build(std::move(records), src.index.params());
  });
  return s;
}

std::uint64_t partition_seed(std::uint64_t seed, std::size_t partition) {
  return mix_seed(seed, 0x50000 + partition);
}

PartitionArtifacts build_partition(const Graph& g, const Partition& p, std::size_t length,
                                   const TrainedEmbedder& embedder, const IndexParams& params) {
  PartitionArtifacts a;
  a.expanded = expand(g, p, length);
  a.embedder = embedder;
  a.index = ARTree::build(records_for(g, a.expanded, length, embedder), params);
  return a;
}

Store build_store(const Graph& g, const StoreOptions& options) {
  validate(options.embedder);
  Store s;
  s.graph = g;
  s.length = options.length;
  s.partitions = partition_graph(g, options.partition_size);
  s.parts.resize(s.partitions.size());
  parallel_for(s.partitions.size(), [&](std::size_t j) {
    auto ep = expand(g, s.partitions[j], options.length);
    auto t = train_embedder(g, ep.vertices, options.embedder, partition_seed(options.seed, j));
    s.parts[j] = build_partition(g, s.partitions[j], options.length, t, options.index);
  });
  return s;
}

std::vector<std::vector<QueryPathRecord>> embed_query(const Graph& q, const QueryPlan& plan,
                                                      const Store& store) {
  std::vector<std::vector<QueryPathRecord>> out(store.parts.size());
  for (std::size_t j = 0; j < store.parts.size(); ++j) {
    for (const auto& p : plan.paths) {
      out[j].push_back(make_query_record(store.parts[j].embedder, q, p));
    }
  }
  return out;
}

std::vector<Mapping> join_candidates(const QueryPlan& plan, const CandidateSet& cands,
                                     const Graph& q, const Graph& g) {
  const std::size_t n = q.vertex_count();
  std::vector<Mapping> partial;
  if (plan.paths.empty() || cands.size() != plan.paths.size()) return {};

  std::vector<char> assigned(n, 0);
  std::vector<char> done(plan.paths.size(), 0);
  auto edges_ok = [&](const Mapping& m, VertexId u) {
    for (VertexId w : q.neighbors(u)) {
      if (m[w] != kNone && !g.has_edge(m[u], m[w])) return false;
    }
    return true;
  };

  for (std::size_t step = 0; step < plan.paths.size(); ++step) {
    // Smallest list among paths connected to what is joined so far.
    std::size_t pick = plan.paths.size();
    for (int pass = 0; pass < 2 && pick == plan.paths.size(); ++pass) {
      for (std::size_t i = 0; i < plan.paths.size(); ++i) {
        if (done[i]) continue;
        bool connected = step == 0;
        for (VertexId u : plan.paths[i]) connected = connected || assigned[u];
        if (pass == 0 && !connected) continue;
        if (pick == plan.paths.size() || cands[i].size() < cands[pick].size()) pick = i;
      }
    }
    done[pick] = 1;
    const auto& qp = plan.paths[pick];
    std::vector<std::size_t> shared, fresh;
    for (std::size_t k = 0; k < qp.size(); ++k) (assigned[qp[k]] ? shared : fresh).push_back(k);

    std::vector<Mapping> next;
    if (step == 0) {
      for (const auto& dp : cands[pick]) {
        Mapping m(n, kNone);
        bool ok = true;
        for (std::size_t k = 0; k < qp.size() && ok; ++k) {
          for (std::size_t k2 = 0; k2 < k; ++k2) ok = ok && dp.vertices[k2] != dp.vertices[k];
          m[qp[k]] = dp.vertices[k];
        }
        for (std::size_t k = 0; k < qp.size() && ok; ++k) ok = edges_ok(m, qp[k]);
        if (ok) next.push_back(std::move(m));
      }
    } else {
      std::unordered_map<std::vector<VertexId>, std::vector<std::size_t>, KeyHash> table;
      std::vector<VertexId> key(shared.size());
      for (std::size_t c = 0; c < cands[pick].size(); ++c) {
        for (std::size_t s = 0; s < shared.size(); ++s) key[s] = cands[pick][c].vertices[shared[s]];
        table[key].push_back(c);
      }
      for (const auto& m : partial) {
        for (std::size_t s = 0; s < shared.size(); ++s) key[s] = m[qp[shared[s]]];
        auto it = table.find(key);
        if (it == table.end()) continue;
        for (std::size_t c : it->second) {
          const auto& dp = cands[pick][c].vertices;
          bool ok = true;
          for (std::size_t k : fresh) {
            for (VertexId u = 0; u < n && ok; ++u) ok = m[u] != dp[k];
            for (std::size_t k2 : fresh) ok = ok && (k2 == k || dp[k2] != dp[k]);
            if (!ok) break;
          }
          if (!ok) continue;
          Mapping ext = m;
          for (std::size_t k : fresh) ext[qp[k]] = dp[k];
          for (std::size_t k : fresh) ok = ok && edges_ok(ext, qp[k]);
          if (ok) next.push_back(std::move(ext));
        }
      }
    }
    for (VertexId u : qp) assigned[u] = 1;
    partial = std::move(next);
    if (partial.empty()) break;
  }

  std::vector<Mapping> out;
  for (auto& m : partial) {
    if (is_embedding(q, g, m)) out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// Per query vertex, data vertices passing label and node dominance pruning in
// their owner partition, then backtracking over those sets.
std::vector<Mapping> vertex_fallback(const Graph& q, const Store& store, MatchOutcome& outcome) {
  const auto& g = store.graph;
  const std::size_t nq = q.vertex_count();
  std::vector<std::vector<char>> allowed(nq, std::vector<char>(g.vertex_count(), 0));
  outcome.candidates.assign(nq, 0);
  for (const auto& part : store.parts) {
    const auto& t = part.embedder;
    for (VertexId u = 0; u < nq; ++u) {
      const std::array<VertexId, 1> one{u};
      const auto qr = make_query_record(t, q, one);
      if (!qr.matchable) continue;
      for (VertexId v : part.expanded.core_vertices) {
        if (g.label(v) != q.label(u)) continue;
        bool ok = dominates(qr.primary, node_embedding(t, g, v, 0));
        for (std::size_t w = 0; w < t.auxiliary.size() && ok; ++w) {
          ok = dominates(qr.auxiliary[w], node_embedding(t, g, v, w + 1));
        }
        if (ok) {
          allowed[u][v] = 1;
          ++outcome.candidates[u];
        }
      }
    }
  }
  outcome.paths_scanned = nq * g.vertex_count();
  outcome.vertices_fallback = std::accumulate(outcome.candidates.begin(), outcome.candidates.end(),
                                              std::size_t{0});

  const auto order = oracle_order(q);
  Mapping m(nq, kNone);
  std::vector<char> used(g.vertex_count(), 0);
  std::vector<Mapping> out;
  auto rec = [&](auto&& self, std::size_t depth) -> void {
    if (depth == nq) {
      out.push_back(m);
      return;
    }
    const VertexId u = order[depth];
    auto attempt = [&](VertexId v) {
      if (used[v] || !allowed[u][v]) return;
      for (VertexId w : q.neighbors(u)) {
        if (m[w] != kNone && !g.has_edge(v, m[w])) return;
      }
      m[u] = v;
      used[v] = 1;
      self(self, depth + 1);
      used[v] = 0;
      m[u] = kNone;
    };
    VertexId anchor = kNone;
    for (VertexId w : q.neighbors(u)) {
      if (m[w] != kNone) {
        anchor = m[w];
        break;
      }
    }
    if (anchor != kNone) {
      for (VertexId v : g.neighbors(anchor)) attempt(v);
    } else {
      for (VertexId v = 0; v < g.vertex_count(); ++v) attempt(v);
    }
  };
  rec(rec, 0);
  std::vector<Mapping> verified;
  for (auto& mm : out) {
    if (is_embedding(q, g, mm)) verified.push_back(std::move(mm));
  }
  std::sort(verified.begin(), verified.end());
  return verified;
}

}  // namespace

MatchOutcome match(const Graph& q, const Store& store, const MatchOptions& options) {
  MatchOutcome outcome;
  auto t0 = std::chrono::steady_clock::now();

  PathWeightFn weight;
  if (options.weight == WeightMode::kDominance) {
    weight = [&](std::span<const VertexId> p) {
      double count = 0.0;
      for (const auto& part : store.parts) {
        const std::array<QueryPathRecord, 1> one{make_query_record(part.embedder, q, p)};
        count += static_cast<double>(part.index.traverse(one).front().size());
      }
      return count;
    };
  } else {
    weight = [&](std::span<const VertexId> p) { return path_weight_deg(q, p); };
  }
  outcome.plan = select_plan(q, store.length, weight, options.plan);
  outcome.plan_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  if (outcome.plan.fallback || outcome.plan.length != store.length) {
    outcome.matches = vertex_fallback(q, store, outcome);
    outcome.refine_ms = ms_since(t0);
    return outcome;
  }

  const auto records = embed_query(q, outcome.plan, store);
  std::vector<std::vector<std::vector<std::uint32_t>>> hits(store.parts.size());
  parallel_for(store.parts.size(),
               [&](std::size_t j) { hits[j] = store.parts[j].index.traverse(records[j]); });
  CandidateSet cands(outcome.plan.paths.size());
  for (std::size_t j = 0; j < store.parts.size(); ++j) {
    const auto& recs = store.parts[j].index.records();
    for (std::size_t i = 0; i < cands.size(); ++i) {
      for (std::uint32_t r : hits[j][i]) cands[i].push_back(recs[r].path);
    }
  }
  outcome.candidates.resize(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) outcome.candidates[i] = cands[i].size();
  outcome.paths_scanned = cands.size() * store.indexed_paths();
  outcome.filter_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  outcome.matches = join_candidates(outcome.plan, cands, q, store.graph);
  outcome.refine_ms = ms_since(t0);
  return outcome;
}

std::string format_mapping(const Mapping& m) {
  std::string s = "m";
  for (std::size_t u = 0; u < m.size(); ++u) {
    s += " q" + std::to_string(u) + "->" + std::to_string(m[u]);
  }
  return s;
}

}  // namespace gnnpe
