// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gnnpe/gnn.hpp"
#include "gnnpe/harness.hpp"
#include "gnnpe/kernels.hpp"
#include "gnnpe/matcher.hpp"
#include "gnnpe/oracle.hpp"
#include "gnnpe/path_index.hpp"
#include "gnnpe/random.hpp"
#include "gnnpe/synthetic.hpp"
#include "index_fixtures.hpp"

using namespace gnnpe;

namespace {

// Pinned tolerances and sizes.
constexpr std::size_t kQueriesPerGraph = 100;
constexpr double kQueryAvgDegree = 3.0;
constexpr std::size_t kRestarts = 3;
constexpr std::size_t kMaxEpochs = 500;
constexpr std::size_t kTraversalInstances = 1000;
constexpr std::size_t kGradientBatches = 50;
constexpr double kGradientRelTol = 1e-4;
constexpr double kFiniteDiffStep = 1e-5;
constexpr double kPruningFloor = 0.90;
constexpr std::size_t kPartitionVertices = 2500;

struct Result {
  bool pass = true;
  std::string detail;
};

struct Workload {
  std::string name;
  Graph graph;
  Store store;
  std::vector<SampledQuery> queries;
  std::vector<MatchOutcome> outcomes;
  std::vector<std::vector<Mapping>> expected;
};

void progress(const std::string& s) { std::cerr << "[acceptance] " << s << std::endl; }

StoreOptions store_options(std::size_t partition_size, std::size_t aux, std::uint64_t seed) {
  StoreOptions o;
  o.embedder.restarts = kRestarts;
  o.embedder.max_epochs = kMaxEpochs;
  o.embedder.auxiliary_models = aux;
  o.partition_size = partition_size;
  o.seed = seed;
  return o;
}

std::size_t total_candidates(const MatchOutcome& o) {
  std::size_t c = 0;
  for (std::size_t x : o.candidates) c += x;
  return c;
}

Workload make_workload(const std::string& name, const SyntheticSpec& spec,
                       std::uint64_t query_seed) {
  Workload w;
  w.name = name;
  w.graph = synthetic_graph(spec);
  auto t0 = std::chrono::steady_clock::now();
  w.store = build_store(w.graph, store_options(kPartitionVertices, 2, spec.seed));
  const double build_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  w.queries = sample_workload(w.graph, kQueriesPerGraph, {5, 8}, kQueryAvgDegree, query_seed);
  for (const auto& q : w.queries) {
    w.outcomes.push_back(match(q.graph, w.store));
    w.expected.push_back(oracle_match(q.graph, w.graph));
  }
  std::ostringstream s;
  s << name << ": |V|=" << w.graph.vertex_count() << " |E|=" << w.graph.edge_count()
    << " avg_deg=" << w.graph.average_degree() << " |Σ|=" << spec.labels << " ("
    << to_string(spec.distribution) << "), " << w.store.parts.size() << " partitions, "
    << w.store.indexed_paths() << " paths, built in " << build_s << " s";
  progress(s.str());
  return w;
}

Result exactness(const std::vector<Workload>& ws) {
  Result r;
  std::ostringstream d;
  for (const auto& w : ws) {
    std::size_t reported = 0, expected = 0, hit = 0, mismatched = 0;
    for (std::size_t i = 0; i < w.queries.size(); ++i) {
      const auto& got = w.outcomes[i].matches;
      const auto& want = w.expected[i];
      reported += got.size();
      expected += want.size();
      std::vector<Mapping> common;
      std::set_intersection(got.begin(), got.end(), want.begin(), want.end(),
                            std::back_inserter(common));
      hit += common.size();
      if (got != want) ++mismatched;
    }
    const double precision = reported ? static_cast<double>(hit) / reported : 1.0;
    const double recall = expected ? static_cast<double>(hit) / expected : 1.0;
    if (mismatched != 0 || precision != 1.0 || recall != 1.0) r.pass = false;
    d << w.name << " " << w.queries.size() << " queries, " << expected
      << " oracle matches, precision " << precision << " recall " << recall << "; ";
  }
  r.detail = d.str();
  return r;
}

Result convergence(const std::vector<Workload>& ws) {
  Result r;
  std::size_t partitions = 0, models = 0, worst_epochs = 0, violations = 0, max_core = 0;
  for (const auto& w : ws) {
    for (const auto& p : w.store.parts) {
      ++partitions;
      max_core = std::max(max_core, p.expanded.core_vertices.size());
      if (p.embedder.config.restarts != kRestarts) r.pass = false;
      for (std::size_t f = 0; f < p.embedder.families(); ++f) {
        ++models;
        const auto& fam = p.embedder.family(f);
        worst_epochs = std::max(worst_epochs, fam.epochs);
        if (fam.epochs > kMaxEpochs) r.pass = false;
      }
      violations += audit_certificate(p.embedder, w.graph);
    }
  }
  if (violations != 0 || max_core > 5000) r.pass = false;
  std::ostringstream d;
  d << partitions << " partitions (largest core " << max_core << "), " << models
    << " models, b=" << kRestarts << ", max epochs to zero loss " << worst_epochs
    << ", certificate violations " << violations;
  r.detail = d.str();
  return r;
}

Result no_false_dismissals(const std::vector<Workload>& ws) {
  Result r;
  std::size_t query_paths = 0, violations = 0, oracle_paths = 0, candidates = 0;
  for (const auto& w : ws) {
    const std::size_t l = w.store.length;
    for (const auto& sq : w.queries) {
      const Graph& q = sq.graph;
      std::vector<VertexId> all(q.vertex_count());
      for (VertexId u = 0; u < all.size(); ++u) all[u] = u;
      QueryPlan every;
      every.length = l;
      for (const auto& p : enumerate_paths(q, all, l)) every.paths.push_back(p.vertices);
      const auto recs = embed_query(q, every, w.store);
      std::vector<std::set<Path>> cands(every.paths.size());
      for (std::size_t j = 0; j < w.store.parts.size(); ++j) {
        const auto& index = w.store.parts[j].index;
        const auto hits = index.traverse(recs[j]);
        for (std::size_t i = 0; i < hits.size(); ++i) {
          for (std::uint32_t h : hits[i]) cands[i].insert(index.records()[h].path);
        }
      }
      for (std::size_t i = 0; i < every.paths.size(); ++i) {
        ++query_paths;
        candidates += cands[i].size();
        for (const auto& p : oracle_path_matches(q, every.paths[i], w.graph)) {
          ++oracle_paths;
          if (!cands[i].count(p)) ++violations;
        }
      }
    }
  }
  r.pass = violations == 0;
  std::ostringstream d;
  d << query_paths << " query paths, " << oracle_paths << " oracle path matches, " << candidates
    << " candidates, " << violations << " dismissed";
  r.detail = d.str();
  return r;
}

Result traversal_correctness() {
  Result r;
  Rng rng(4242);
  std::size_t mismatches = 0, queries = 0, hits = 0;
  const std::size_t lengths[] = {1, 2, 3}, dims[] = {2, 3};
  for (std::size_t inst = 0; inst < kTraversalInstances; ++inst) {
    const std::size_t l = lengths[inst % 3], d = dims[(inst / 3) % 2];
    const std::size_t n = 20 + uniform_index(rng, 400);
    const std::size_t aux = uniform_index(rng, 3);
    IndexParams params;
    params.max_fanout = 4 + uniform_index(rng, 29);
    auto recs = fixtures::random_records(rng, n, l, d, aux, 1 + uniform_index(rng, 4));
    const ARTree tree = ARTree::build(recs, params);
    if (!tree.audit().empty()) ++mismatches;
    std::vector<QueryPathRecord> qs;
    for (int k = 0; k < 5; ++k) {
      auto q = fixtures::query_near(rng, recs[uniform_index(rng, n)]);
      if (k == 4) {
        for (auto& x : q.primary) x = uniform_unit(rng);
      }
      qs.push_back(std::move(q));
    }
    const auto got = tree.traverse(qs);
    const auto want = linear_scan_serial(recs, qs);
    for (std::size_t k = 0; k < qs.size(); ++k) {
      auto a = got[k], b = want[k];
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) ++mismatches;
      hits += b.size();
      ++queries;
    }
  }
  r.pass = mismatches == 0;
  std::ostringstream d;
  d << kTraversalInstances << " instances, " << queries << " queries, " << hits
    << " expected hits, " << mismatches << " mismatches";
  r.detail = d.str();
  return r;
}

Result lemma_one(const Workload& w) {
  Result r;
  EmbedderConfig c;
  InitOptions zero;
  zero.zero_output_weights = true;
  const GnnModel m = init_model(c, 17, zero);
  std::vector<VertexId> vs(w.graph.vertex_count());
  for (VertexId v = 0; v < vs.size(); ++v) vs[v] = v;
  const auto set =
      build_training_set(w.graph, vs, label_permutation(w.graph.label_domain_size(), 0), c.theta);
  std::size_t off = 0, outputs = 0;
  for (const auto* table : {&set.parents, &set.children}) {
    for (double x : kernels::embed_all_serial(m, *table)) {
      ++outputs;
      if (x != 0.5) ++off;
    }
  }
  const double loss = dominance_loss(m, set, set.pairs);
  r.pass = off == 0 && loss == 0.0;
  std::ostringstream d;
  d << outputs << " output components, " << off << " differ from 0.5, loss " << loss << " over "
    << set.pairs.size() << " pairs";
  r.detail = d.str();
  return r;
}

Result capacity() {
  EmbedderConfig c;
  c.heads = 3;
  c.hidden_dim = 32;
  c.theta = 10;
  const auto rep = capacity_check(c);
  Result r;
  r.pass = rep.pass && rep.capacity == 288 && rep.bound == 121;
  r.detail = "capacity " + std::to_string(rep.capacity) + " vs bound " +
             std::to_string(rep.bound) + (rep.pass ? ", pass" : ", fail");
  return r;
}

Result gradients(const Workload& w) {
  Result r;
  EmbedderConfig c;
  c.heads = 2;
  c.hidden_dim = 4;
  std::vector<VertexId> vs(200);
  for (VertexId v = 0; v < vs.size(); ++v) vs[v] = v;
  const auto set =
      build_training_set(w.graph, vs, label_permutation(w.graph.label_domain_size(), 0), c.theta);
  Rng rng(99);
  double worst = 0.0;
  std::size_t zero_loss = 0;
  for (std::size_t b = 0; b < kGradientBatches; ++b) {
    GnnModel m = init_model(c, 1000 + b);
    // Signed output weights so that a good share of pairs violate dominance.
    for (std::size_t i = m.fc_offset(); i < m.param_count(); ++i) {
      m.params()[i] = uniform_real(rng, -2.0, 2.0);
    }
    std::vector<TrainingSet::Pair> batch;
    for (int k = 0; k < 8; ++k) batch.push_back(set.pairs[uniform_index(rng, set.pairs.size())]);
    std::vector<double> grad(m.param_count());
    const double loss = kernels::batch_gradient_serial(m, set, batch, grad);
    if (loss == 0.0) ++zero_loss;
    double num = 0.0, den_a = 0.0, den_f = 0.0;
    for (std::size_t i = 0; i < m.param_count(); ++i) {
      GnnModel plus = m, minus = m;
      plus.params()[i] += kFiniteDiffStep;
      minus.params()[i] -= kFiniteDiffStep;
      const double fd = (dominance_loss(plus, set, batch) - dominance_loss(minus, set, batch)) /
                        (2 * kFiniteDiffStep);
      num += (fd - grad[i]) * (fd - grad[i]);
      den_a += grad[i] * grad[i];
      den_f += fd * fd;
    }
    const double scale = std::max(std::sqrt(den_a), std::sqrt(den_f));
    const double rel = scale > 0.0 ? std::sqrt(num) / scale : std::sqrt(num);
    worst = std::max(worst, rel);
  }
  r.pass = worst <= kGradientRelTol && zero_loss < kGradientBatches;
  std::ostringstream d;
  d << kGradientBatches << " batches of 8 pairs (" << zero_loss
    << " with zero loss), worst relative error " << worst << " (tolerance " << kGradientRelTol
    << ")";
  r.detail = d.str();
  return r;
}

Result partition_invariance(const Workload& w) {
  Result r;
  const std::size_t n = w.graph.vertex_count();
  std::ostringstream d;
  std::size_t differing = 0;
  for (std::size_t m : {1u, 2u, 5u}) {
    const std::size_t size = (n + m - 1) / m;
    const Store s = build_store(w.graph, store_options(size, 2, 31 + m));
    if (s.parts.size() != m) r.pass = false;
    std::size_t diff = 0;
    for (std::size_t i = 0; i < w.queries.size(); ++i) {
      if (match(w.queries[i].graph, s).matches != w.expected[i]) ++diff;
    }
    differing += diff;
    d << "m=" << s.parts.size() << ": " << diff << " differing; ";
  }
  if (differing != 0) r.pass = false;
  d << "over " << w.queries.size() << " queries on " << w.name;
  r.detail = d.str();
  return r;
}

Result multi_gnn(const Workload& w) {
  Result r;
  std::ostringstream d;
  std::vector<double> means;
  std::size_t differing = 0, per_query_increase = 0;
  std::vector<std::size_t> prev;
  for (std::size_t n : {0u, 1u, 2u}) {
    const Store s = w.store.with_auxiliary_count(n);
    double sum = 0.0;
    std::vector<std::size_t> cur;
    for (std::size_t i = 0; i < w.queries.size(); ++i) {
      const auto out = match(w.queries[i].graph, s);
      if (out.matches != w.expected[i]) ++differing;
      cur.push_back(total_candidates(out));
      sum += static_cast<double>(cur.back());
    }
    for (std::size_t i = 0; i < prev.size(); ++i) per_query_increase += cur[i] > prev[i];
    prev = cur;
    means.push_back(sum / static_cast<double>(w.queries.size()));
    d << "n=" << n << " mean candidates " << means.back() << "; ";
  }
  const bool monotone = means[1] <= means[0] && means[2] <= means[1];
  r.pass = differing == 0 && monotone && per_query_increase == 0;
  d << differing << " result differences on " << w.name;
  r.detail = d.str();
  return r;
}

Result pruning(const Workload& w) {
  Result r;
  double sum = 0.0, lo = 1.0;
  std::size_t rows = 0;
  for (std::size_t i = 0; i < w.outcomes.size(); ++i) {
    const auto m = metrics_of(i, w.outcomes[i], w.outcomes[i].matches == w.expected[i]);
    const auto row = csv_row(m);
    if (std::count(row.begin(), row.end(), ',') < 8) r.pass = false;
    sum += m.pruning_power;
    lo = std::min(lo, m.pruning_power);
    ++rows;
  }
  const double mean = sum / static_cast<double>(rows);
  r.pass = r.pass && mean >= kPruningFloor;
  std::ostringstream d;
  d.precision(6);
  d << w.name << " |Σ|=" << w.graph.label_domain_size() << ": mean pruning power " << mean
    << " (min " << lo << ", floor " << kPruningFloor << ") over " << rows << " queries";
  r.detail = d.str();
  return r;
}

Result reference_vectors() {
  Result r;
  using V = std::vector<double>;
  const bool a = dominates(V{0.62, 0.61}, V{0.78, 0.79});
  const bool b = !dominates(V{0.62, 0.61}, V{0.73, 0.58});
  TrainedEmbedder t;
  t.config.embedding_dim = 2;
  t.config.auxiliary_models = 0;
  t.label_domain = 1;
  t.vertices = {1, 2, 3};
  t.node_rows = {0.78, 0.79, 0.75, 0.77, 0.73, 0.58};
  t.label_table = {{1, {0.5, 0.5}}};
  std::vector<std::pair<VertexId, VertexId>> e{{3, 1}, {1, 2}};
  const Graph g({1, 1, 1, 1}, e, 1);
  const auto rec = make_path_record(t, g, Path{{3, 1, 2}}, 0);
  const bool c = rec.primary == V{0.73, 0.58, 0.78, 0.79, 0.75, 0.77};
  r.pass = a && b && c;
  r.detail = std::string("(0.62,0.61) dominates (0.78,0.79): ") + (a ? "yes" : "NO") +
             "; (0.62,0.61) does not dominate (0.73,0.58): " + (b ? "yes" : "NO") +
             "; o(v3,v1,v2) concatenation exact: " + (c ? "yes" : "NO");
  return r;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Workload> ws;
  {
    SyntheticSpec a;
    a.vertices = 1000;
    a.average_degree = 4.2;
    a.labels = 20;
    a.distribution = LabelDistribution::kUniform;
    a.seed = 101;
    ws.push_back(make_workload("uniform-1k", a, 1));
    SyntheticSpec b;
    b.vertices = 3000;
    b.average_degree = 4.6;
    b.labels = 50;
    b.distribution = LabelDistribution::kGaussian;
    b.seed = 202;
    ws.push_back(make_workload("gaussian-3k", b, 2));
    SyntheticSpec c;
    c.vertices = 5000;
    c.average_degree = 5.0;
    c.labels = 100;
    c.distribution = LabelDistribution::kZipf;
    c.seed = 303;
    ws.push_back(make_workload("zipf-5k", c, 3));
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<Result()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "exactness", [&] { return exactness(ws); }},
      {2, "zero-loss convergence", [&] { return convergence(ws); }},
      {3, "no false dismissals", [&] { return no_false_dismissals(ws); }},
      {4, "traversal equals linear scan", [] { return traversal_correctness(); }},
      {5, "zero output weights", [&] { return lemma_one(ws[0]); }},
      {6, "capacity check", [] { return capacity(); }},
      {7, "gradient check", [&] { return gradients(ws[0]); }},
      {8, "partition invariance", [&] { return partition_invariance(ws[0]); }},
      {9, "multi-model monotonicity", [&] { return multi_gnn(ws[1]); }},
      {10, "pruning power", [&] { return pruning(ws[2]); }},
      {11, "reference vectors", [] { return reference_vectors(); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto s = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - s).count();
    std::printf("criterion %2d %-30s %s  %s [%.1fs]\n", c.id, c.name, r.pass ? "PASS" : "FAIL",
                r.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !r.pass;
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("acceptance: %zu criteria, %d failed, %.1fs\n", criteria.size(), failed, total);
  return failed == 0 ? 0 : 1;
}
