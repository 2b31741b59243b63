#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gnnpe/matcher.hpp"
#include "gnnpe/synthetic.hpp"

namespace gnnpe {

struct RunConfig {
  std::string graph;
  std::string out = "gnnpe-out";
  int threads = 0;  // 0 = OpenMP default
  std::uint64_t seed = 1;

  EmbedderConfig embedder;
  std::size_t length = 2;
  std::size_t partition_size = 10000;
  IndexParams index;

  PlanStrategy strategy = PlanStrategy::kOne;
  std::size_t epsilon = 3;
  WeightMode weight = WeightMode::kDegree;

  std::size_t queries = 100;
  std::size_t query_vertices = 8;
  double query_avg_degree = 3.0;
  std::uint64_t query_seed = 11;
  std::string query_file;  // optional single query graph
  std::uint64_t oracle_budget = 0;

  SyntheticSpec synthetic;

  StoreOptions store_options() const;
  MatchOptions match_options() const;
};

class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applies flat `key = value` lines (`#` comments) onto `base`. Unknown keys
/// and malformed values throw ConfigError.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
void set_config_value(RunConfig& c, const std::string& key, const std::string& value);
std::string format_config(const RunConfig& c);

/// (scanned - surviving) / scanned, and 0 when nothing was scanned.
double pruning_power(std::size_t scanned, std::size_t surviving);

struct QueryMetrics {
  std::size_t query_id = 0;
  double plan_cost = 0.0;
  std::size_t paths_scanned = 0;
  std::size_t candidates = 0;
  double pruning_power = 0.0;
  double filter_ms = 0.0, refine_ms = 0.0, plan_ms = 0.0;
  std::size_t matches = 0;
  bool oracle_ok = false;
};

QueryMetrics metrics_of(std::size_t id, const MatchOutcome& o, bool oracle_ok);
std::string csv_header();
std::string csv_row(const QueryMetrics& m);

/// Query `i` has query_vertices[i % size] vertices and seed mix(seed, i).
std::vector<SampledQuery> sample_workload(const Graph& g, std::size_t count,
                                          const std::vector<std::size_t>& sizes,
                                          double avg_degree, std::uint64_t seed);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string file_checksum(const std::string& path);

/// `key value` lines in the output directory.
using Manifest = std::map<std::string, std::string>;
Manifest read_manifest(const std::string& dir);
void write_manifest(const std::string& dir, const Manifest& m);

/// Writes partition assignment, model and index files for every partition.
void save_store(const Store& s, const std::string& dir);
/// Reads them back against `g`; boxes are rebuilt and audited.
Store load_store(const Graph& g, const std::string& dir, std::size_t length);

/// Runs one pipeline stage; returns the process exit code. Stage output goes
/// to `out`, diagnostics to `err`.
int run_stage(const std::string& command, const RunConfig& config, std::ostream& out,
              std::ostream& err);

}  // namespace gnnpe
