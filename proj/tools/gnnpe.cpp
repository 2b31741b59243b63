// gnnpe: offline pipeline (partition, train, index) and online queries
// (plan, query, bench, verify) over one data graph.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gnnpe/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Exact subgraph matching with dominance-embedding path indexes"};
  app.require_subcommand(1);

  std::string config, graph, out;
  int threads = -1;
  long long seed = -1;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "flat key = value config file");
    sub->add_option("--graph", graph, "data graph file");
    sub->add_option("--out", out, "artifact directory");
    sub->add_option("--threads", threads, "OpenMP threads");
    sub->add_option("--seed", seed, "master seed");
  };
  const char* commands[][2] = {
      {"generate", "write a Newman-Watts-Strogatz synthetic graph to --graph"},
      {"partition", "split the graph into partitions"},
      {"train", "train per-partition dominance embedders"},
      {"index", "build per-partition path indexes"},
      {"plan", "print query plans for the workload"},
      {"query", "match the workload and print mappings"},
      {"bench", "per-query metrics as CSV"},
      {"verify", "compare matches with the backtracking oracle"},
  };
  for (auto& [name, help] : commands) common(app.add_subcommand(name, help));

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  gnnpe::RunConfig cfg;
  try {
    if (!config.empty()) cfg = gnnpe::load_config(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  if (!graph.empty()) cfg.graph = graph;
  if (!out.empty()) cfg.out = out;
  if (threads >= 0) cfg.threads = threads;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  return gnnpe::run_stage(command, cfg, std::cout, std::cerr);
}
