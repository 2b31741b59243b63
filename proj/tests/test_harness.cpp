#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "gnnpe/harness.hpp"

using namespace gnnpe;

TEST_CASE("pruning power") {
  CHECK(pruning_power(1000, 2) == doctest::Approx(0.998));
  CHECK(pruning_power(50, 50) == 0.0);
  CHECK(pruning_power(0, 0) == 0.0);
  CHECK_THROWS(pruning_power(3, 4));
}

TEST_CASE("config parsing") {
  auto c = parse_config(
      "# comment\n"
      "l = 3\n"
      "heads=4\n"
      "strategy = aip\n"
      "weight = dr\n"
      "epsilon = 5\n"
      "synthetic_distribution = zipf\n"
      "\n"
      "fanout = 16\n");
  CHECK(c.length == 3);
  CHECK(c.embedder.heads == 4);
  CHECK(c.strategy == PlanStrategy::kAll);
  CHECK(c.weight == WeightMode::kDominance);
  CHECK(c.epsilon == 5);
  CHECK(c.synthetic.distribution == LabelDistribution::kZipf);
  CHECK(c.index.max_fanout == 16);
  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("heads = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("heads\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("strategy = best\n"), ConfigError);

  auto again = parse_config(format_config(c));
  CHECK(format_config(again) == format_config(c));
  set_config_value(c, "seed", "99");
  CHECK(c.seed == 99);
}

TEST_CASE("csv") {
  QueryMetrics m;
  m.query_id = 4;
  m.paths_scanned = 100;
  m.candidates = 3;
  m.pruning_power = 0.97;
  m.matches = 2;
  m.oracle_ok = true;
  const auto header = csv_header();
  CHECK(header.rfind("query_id,plan_cost,paths_scanned,candidates,pruning_power,filter_ms,"
                     "refine_ms,matches,oracle_ok",
                     0) == 0);
  const auto row = csv_row(m);
  CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
  CHECK(row.rfind("4,", 0) == 0);
}

TEST_CASE("workload sampling is deterministic") {
  SyntheticSpec s;
  s.vertices = 400;
  s.labels = 10;
  Graph g = synthetic_graph(s);
  auto a = sample_workload(g, 6, {5, 8}, 3.0, 1);
  auto b = sample_workload(g, 6, {5, 8}, 3.0, 1);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(a[i].graph.vertex_count() == (i % 2 ? 8u : 5u));
    CHECK(a[i].graph.edges() == b[i].graph.edges());
  }
}

TEST_CASE("checksums and manifests") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  auto dir = std::filesystem::temp_directory_path() / "gnnpe_manifest_test";
  std::filesystem::create_directories(dir);
  Manifest m{{"graph", "abc"}, {"train", "def"}};
  write_manifest(dir.string(), m);
  CHECK(read_manifest(dir.string()) == m);
  std::filesystem::remove_all(dir);
}

TEST_CASE("stages run end to end in-process") {
  auto dir = std::filesystem::temp_directory_path() / "gnnpe_stage_test";
  std::filesystem::remove_all(dir);
  RunConfig c;
  c.out = dir.string();
  c.synthetic.vertices = 500;
  c.synthetic.labels = 30;
  c.partition_size = 250;
  c.queries = 8;
  std::ostringstream out, err;
  CHECK(run_stage("generate", c, out, err) == 2);
  c.graph = (dir / "graph.txt").string();
  CHECK(run_stage("generate", c, out, err) == 0);
  REQUIRE(std::filesystem::exists(c.graph));
  for (const char* stage : {"partition", "train", "index", "verify"}) {
    INFO(stage << ": " << err.str());
    CHECK(run_stage(stage, c, out, err) == 0);
  }
  CHECK(out.str().find("PASS") != std::string::npos);
  std::ostringstream again;
  CHECK(run_stage("train", c, again, err) == 0);
  CHECK(again.str().find("up to date") != std::string::npos);
  CHECK(run_stage("nonsense", c, out, err) == 64);

  Store s = load_store(read_graph_file(c.graph), c.out, c.length);
  CHECK(s.parts.size() == 2);
  for (const auto& p : s.parts) CHECK(p.index.audit().empty());
  std::filesystem::remove_all(dir);
}
