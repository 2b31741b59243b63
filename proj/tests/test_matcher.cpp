#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "gnnpe/matcher.hpp"
#include "gnnpe/synthetic.hpp"

using namespace gnnpe;

namespace {

const Store& shared_store() {
  static const Store store = [] {
    SyntheticSpec s;
    s.vertices = 600;
    s.average_degree = 4.6;
    s.labels = 15;
    s.seed = 3;
    StoreOptions o;
    o.partition_size = 200;
    o.embedder.auxiliary_models = 1;
    o.seed = 5;
    return build_store(synthetic_graph(s), o);
  }();
  return store;
}

}  // namespace

TEST_CASE("join on a triangle") {
  Graph t = fixtures::triangle();
  auto plan = select_plan(t, 2);
  CandidateSet c(1);
  c[0] = enumerate_paths(t, fixtures::all_vertices(t), 2);
  CHECK(join_candidates(plan, c, t, t).size() == 6);
}

TEST_CASE("join with disjoint candidates is empty") {
  Graph c5 = fixtures::chain({1, 1, 1, 1, 1});
  QueryPlan plan;
  plan.length = 2;
  plan.paths = {{0, 1, 2}, {2, 3, 4}};
  plan.weights = {-5, -5};
  plan.cost = -10;
  plan.overlaps[{0, 1}] = {2};
  CandidateSet c{{Path{{0, 1, 2}}}, {Path{{4, 3, 1}}}};
  CHECK(join_candidates(plan, c, c5, c5).empty());
  c[1] = {Path{{2, 3, 4}}};
  CHECK(join_candidates(plan, c, c5, c5) == std::vector<Mapping>{{0, 1, 2, 3, 4}});
}

TEST_CASE("store layout") {
  const Store& s = shared_store();
  CHECK(s.partitions.size() == 3);
  std::size_t total = 0;
  for (const auto& p : s.parts) {
    CHECK(p.index.audit().empty());
    CHECK(audit_certificate(p.embedder, s.graph) == 0);
    total += p.index.records().size();
  }
  CHECK(total == s.indexed_paths());
  CHECK(total == enumerate_paths(s.graph, fixtures::all_vertices(s.graph), 2).size());
}

TEST_CASE("match agrees with the oracle on sampled queries") {
  const Store& s = shared_store();
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto sq = sample_query_graph(s.graph, seed % 2 ? 5 : 8, 3.0, seed);
    auto out = match(sq.graph, s);
    CHECK(out.matches == oracle_match(sq.graph, s.graph));
    CHECK_FALSE(out.matches.empty());
    CHECK(std::binary_search(out.matches.begin(), out.matches.end(), sq.source_vertices));
    CHECK(out.candidates.size() == out.plan.paths.size());
  }
}

TEST_CASE("all strategies and weight modes agree") {
  const Store& s = shared_store();
  auto sq = sample_query_graph(s.graph, 6, 2.5, 77);
  auto expect = oracle_match(sq.graph, s.graph);
  for (auto strategy : {PlanStrategy::kOne, PlanStrategy::kAll, PlanStrategy::kEpsilon}) {
    for (auto w : {WeightMode::kDegree, WeightMode::kDominance}) {
      MatchOptions o;
      o.plan.strategy = strategy;
      o.weight = w;
      CHECK(match(sq.graph, s, o).matches == expect);
    }
  }
}

TEST_CASE("small and degenerate queries") {
  const Store& s = shared_store();
  fixtures::Edges none;
  Graph single({s.graph.label(0)}, none, s.graph.label_domain_size());
  auto out = match(single, s);
  CHECK(out.plan.fallback);
  CHECK(out.matches == oracle_match(single, s.graph));

  Graph edge = fixtures::chain({s.graph.label(0), s.graph.label(s.graph.neighbors(0)[0])});
  CHECK(match(edge, s).matches == oracle_match(edge, s.graph));

  Graph alien = fixtures::chain({1, 99, 1});
  auto none_out = match(alien, s);
  CHECK(none_out.matches.empty());
  for (auto c : none_out.candidates) CHECK(c == 0);
}

TEST_CASE("query embedding of a data substructure is bit-equal") {
  const Store& s = shared_store();
  const auto& t = s.parts[0].embedder;
  VertexId v = s.parts[0].expanded.core_vertices[0];
  std::vector<Label> nl;
  for (VertexId w : s.graph.neighbors(v)) nl.push_back(s.graph.label(w));
  auto direct = embed_with(t, 0, s.graph.label(v), nl);
  CHECK(direct == node_embedding(t, s.graph, v, 0));
}

TEST_CASE("fewer auxiliary models keep results") {
  const Store& s = shared_store();
  Store none = s.with_auxiliary_count(0);
  auto sq = sample_query_graph(s.graph, 8, 3.0, 3);
  auto a = match(sq.graph, s), b = match(sq.graph, none);
  CHECK(a.matches == b.matches);
  std::size_t ca = 0, cb = 0;
  for (auto c : a.candidates) ca += c;
  for (auto c : b.candidates) cb += c;
  CHECK(ca <= cb);
}

TEST_CASE("mapping format") {
  CHECK(format_mapping({4, 7}) == "m q0->4 q1->7");
}
