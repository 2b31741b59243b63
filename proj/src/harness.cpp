#include "gnnpe/harness.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "gnnpe/kernels.hpp"
#include "gnnpe/random.hpp"

namespace gnnpe {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config: bad value '" + v + "' for " + key);
  }
  return out;
}

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StageError("cannot write " + path);
  out << text;
  if (!out) throw StageError("write failed: " + path);
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string strategy_name(PlanStrategy s) {
  switch (s) {
    case PlanStrategy::kOne:
      return "oip";
    case PlanStrategy::kAll:
      return "aip";
    case PlanStrategy::kEpsilon:
      return "eip";
  }
  return "oip";
}

}  // namespace

StoreOptions RunConfig::store_options() const {
  StoreOptions o;
  o.embedder = embedder;
  o.length = length;
  o.partition_size = partition_size;
  o.index = index;
  o.seed = seed;
  return o;
}

MatchOptions RunConfig::match_options() const {
  MatchOptions o;
  o.plan.strategy = strategy;
  o.plan.epsilon = epsilon;
  o.plan.seed = mix_seed(seed, 0xE1);
  o.weight = weight;
  return o;
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& v) {
  using sz = std::size_t;
  auto& e = c.embedder;
  if (key == "graph") c.graph = v;
  else if (key == "out") c.out = v;
  else if (key == "threads") c.threads = parse_number<int>(key, v);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "l" || key == "length") c.length = parse_number<sz>(key, v);
  else if (key == "partition_size") c.partition_size = parse_number<sz>(key, v);
  else if (key == "input_dim") e.input_dim = parse_number<sz>(key, v);
  else if (key == "heads") e.heads = parse_number<sz>(key, v);
  else if (key == "hidden_dim") e.hidden_dim = parse_number<sz>(key, v);
  else if (key == "d" || key == "embedding_dim") e.embedding_dim = parse_number<sz>(key, v);
  else if (key == "learning_rate") e.learning_rate = parse_number<double>(key, v);
  else if (key == "batch_size") e.batch_size = parse_number<sz>(key, v);
  else if (key == "theta") e.theta = parse_number<sz>(key, v);
  else if (key == "b" || key == "restarts") e.restarts = parse_number<sz>(key, v);
  else if (key == "n" || key == "auxiliary_models") e.auxiliary_models = parse_number<sz>(key, v);
  else if (key == "max_epochs") e.max_epochs = parse_number<sz>(key, v);
  else if (key == "fanout") c.index.max_fanout = parse_number<sz>(key, v);
  else if (key == "min_fill") c.index.min_fill = parse_number<double>(key, v);
  else if (key == "reinsert") c.index.reinsert_fraction = parse_number<double>(key, v);
  else if (key == "strategy") {
    if (v == "oip") c.strategy = PlanStrategy::kOne;
    else if (v == "aip") c.strategy = PlanStrategy::kAll;
    else if (v == "eip") c.strategy = PlanStrategy::kEpsilon;
    else throw ConfigError("config: strategy must be oip, aip or eip");
  } else if (key == "epsilon") c.epsilon = parse_number<sz>(key, v);
  else if (key == "weight") {
    if (v == "deg") c.weight = WeightMode::kDegree;
    else if (v == "dr") c.weight = WeightMode::kDominance;
    else throw ConfigError("config: weight must be deg or dr");
  } else if (key == "queries") c.queries = parse_number<sz>(key, v);
  else if (key == "query_vertices") c.query_vertices = parse_number<sz>(key, v);
  else if (key == "query_avg_degree") c.query_avg_degree = parse_number<double>(key, v);
  else if (key == "query_seed") c.query_seed = parse_number<std::uint64_t>(key, v);
  else if (key == "query_file") c.query_file = v;
  else if (key == "oracle_budget") c.oracle_budget = parse_number<std::uint64_t>(key, v);
  else if (key == "synthetic_vertices") c.synthetic.vertices = parse_number<sz>(key, v);
  else if (key == "synthetic_avg_degree") c.synthetic.average_degree = parse_number<double>(key, v);
  else if (key == "synthetic_labels") c.synthetic.labels = parse_number<Label>(key, v);
  else if (key == "synthetic_distribution") {
    try {
      c.synthetic.distribution = parse_label_distribution(v);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(std::string("config: ") + ex.what());
    }
  } else if (key == "synthetic_seed") c.synthetic.seed = parse_number<std::uint64_t>(key, v);
  else throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string format_config(const RunConfig& c) {
  std::ostringstream o;
  const auto& e = c.embedder;
  o << "graph = " << c.graph << "\nout = " << c.out << "\nthreads = " << c.threads
    << "\nseed = " << c.seed << "\nl = " << c.length << "\npartition_size = " << c.partition_size
    << "\ninput_dim = " << e.input_dim << "\nheads = " << e.heads
    << "\nhidden_dim = " << e.hidden_dim << "\nd = " << e.embedding_dim
    << "\nlearning_rate = " << num(e.learning_rate) << "\nbatch_size = " << e.batch_size
    << "\ntheta = " << e.theta << "\nb = " << e.restarts << "\nn = " << e.auxiliary_models
    << "\nmax_epochs = " << e.max_epochs << "\nfanout = " << c.index.max_fanout
    << "\nmin_fill = " << num(c.index.min_fill) << "\nreinsert = " << num(c.index.reinsert_fraction)
    << "\nstrategy = " << strategy_name(c.strategy) << "\nepsilon = " << c.epsilon
    << "\nweight = " << (c.weight == WeightMode::kDegree ? "deg" : "dr")
    << "\nqueries = " << c.queries << "\nquery_vertices = " << c.query_vertices
    << "\nquery_avg_degree = " << num(c.query_avg_degree) << "\nquery_seed = " << c.query_seed
    << "\nquery_file = " << c.query_file << "\noracle_budget = " << c.oracle_budget
    << "\nsynthetic_vertices = " << c.synthetic.vertices
    << "\nsynthetic_avg_degree = " << num(c.synthetic.average_degree)
    << "\nsynthetic_labels = " << c.synthetic.labels
    << "\nsynthetic_distribution = " << to_string(c.synthetic.distribution)
    << "\nsynthetic_seed = " << c.synthetic.seed << '\n';
  return o.str();
}

double pruning_power(std::size_t scanned, std::size_t surviving) {
  if (surviving > scanned) throw std::invalid_argument("pruning_power: surviving > scanned");
  if (scanned == 0) return 0.0;
  return static_cast<double>(scanned - surviving) / static_cast<double>(scanned);
}

QueryMetrics metrics_of(std::size_t id, const MatchOutcome& o, bool oracle_ok) {
  QueryMetrics m;
  m.query_id = id;
  m.plan_cost = o.plan.cost;
  m.paths_scanned = o.paths_scanned;
  for (std::size_t c : o.candidates) m.candidates += c;
  m.pruning_power = pruning_power(m.paths_scanned, m.candidates);
  m.filter_ms = o.filter_ms;
  m.refine_ms = o.refine_ms;
  m.plan_ms = o.plan_ms;
  m.matches = o.matches.size();
  m.oracle_ok = oracle_ok;
  return m;
}

std::string csv_header() {
  return "query_id,plan_cost,paths_scanned,candidates,pruning_power,filter_ms,refine_ms,matches,"
         "oracle_ok,plan_ms";
}

std::string csv_row(const QueryMetrics& m) {
  std::ostringstream o;
  o << m.query_id << ',' << num(m.plan_cost) << ',' << m.paths_scanned << ',' << m.candidates
    << ',' << num(m.pruning_power) << ',' << num(m.filter_ms) << ',' << num(m.refine_ms) << ','
    << m.matches << ',' << (m.oracle_ok ? 1 : 0) << ',' << num(m.plan_ms);
  return o.str();
}

std::vector<SampledQuery> sample_workload(const Graph& g, std::size_t count,
                                          const std::vector<std::size_t>& sizes,
                                          double avg_degree, std::uint64_t seed) {
  if (sizes.empty()) throw std::invalid_argument("sample_workload: no query sizes");
  std::vector<SampledQuery> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(sample_query_graph(g, sizes[i % sizes.size()], avg_degree, mix_seed(seed, i)));
  }
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string file_checksum(const std::string& path) { return hex(fnv1a(read_text(path))); }

Manifest read_manifest(const std::string& dir) {
  Manifest m;
  std::ifstream in(fs::path(dir) / "manifest.txt");
  std::string k, v;
  while (in >> k >> v) m[k] = v;
  return m;
}

void write_manifest(const std::string& dir, const Manifest& m) {
  std::string text;
  for (const auto& [k, v] : m) text += k + ' ' + v + '\n';
  write_text((fs::path(dir) / "manifest.txt").string(), text);
}

namespace {

std::string model_file(const std::string& dir, std::size_t j) {
  return (fs::path(dir) / ("model_" + std::to_string(j) + ".txt")).string();
}
std::string index_file(const std::string& dir, std::size_t j) {
  return (fs::path(dir) / ("index_" + std::to_string(j) + ".txt")).string();
}
std::string assignment_file(const std::string& dir) {
  return (fs::path(dir) / "partition.txt").string();
}

std::vector<Partition> load_partitions(const Graph& g, const std::string& dir) {
  return partitions_from_assignment(g, parse_assignment(read_text(assignment_file(dir)),
                                                        g.vertex_count()));
}

}  // namespace

void save_store(const Store& s, const std::string& dir) {
  fs::create_directories(dir);
  write_text(assignment_file(dir),
             format_assignment(assignment_of(s.partitions, s.graph.vertex_count())));
  for (std::size_t j = 0; j < s.parts.size(); ++j) {
    write_text(model_file(dir, j), serialize_embedder(s.parts[j].embedder));
    write_text(index_file(dir, j), s.parts[j].index.serialize(j, s.length));
  }
}

Store load_store(const Graph& g, const std::string& dir, std::size_t length) {
  Store s;
  s.graph = g;
  s.length = length;
  s.partitions = load_partitions(g, dir);
  s.parts.resize(s.partitions.size());
  for (std::size_t j = 0; j < s.partitions.size(); ++j) {
    auto& a = s.parts[j];
    a.expanded = expand(g, s.partitions[j], length);
    a.embedder = deserialize_embedder(read_text(model_file(dir, j)));
    if (a.embedder.vertices != a.expanded.vertices) {
      throw StageError("model " + std::to_string(j) + " does not cover its expanded partition");
    }
    try {
      a.index = ARTree::deserialize(read_text(index_file(dir, j)));
    } catch (const std::runtime_error& e) {
      if (dynamic_cast<const StageError*>(&e)) throw;
      throw StageError(e.what());
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

namespace {

struct Keys {
  std::string graph, partition, train, index;
};

Keys stage_keys(const RunConfig& c) {
  Keys k;
  k.graph = file_checksum(c.graph);
  k.partition = hex(fnv1a(k.graph + " " + std::to_string(c.partition_size)));
  const auto& e = c.embedder;
  std::ostringstream t;
  t << k.partition << ' ' << c.length << ' ' << c.seed << ' ' << e.input_dim << ' ' << e.heads
    << ' ' << e.hidden_dim << ' ' << e.embedding_dim << ' ' << num(e.learning_rate) << ' '
    << e.batch_size << ' ' << e.theta << ' ' << e.restarts << ' ' << e.auxiliary_models << ' '
    << e.max_epochs;
  k.train = hex(fnv1a(t.str()));
  std::ostringstream i;
  i << k.train << ' ' << c.index.max_fanout << ' ' << num(c.index.min_fill) << ' '
    << num(c.index.reinsert_fraction);
  k.index = hex(fnv1a(i.str()));
  return k;
}

bool manifest_has(const Manifest& m, const std::string& key, const std::string& value) {
  auto it = m.find(key);
  return it != m.end() && it->second == value;
}

void require_stage(const Manifest& m, const std::string& stage, const std::string& key) {
  if (!manifest_has(m, stage, key)) {
    throw StageError("missing or stale " + stage +
                     " artifacts for this graph and configuration; run `gnnpe " + stage + "`");
  }
}

Graph load_graph(const RunConfig& c) {
  if (c.graph.empty()) throw ConfigError("no graph given (--graph or `graph =`)");
  return read_graph_file(c.graph);
}

std::vector<SampledQuery> workload(const RunConfig& c, const Graph& g) {
  if (!c.query_file.empty()) {
    SampledQuery s{QueryGraph(read_graph_file(c.query_file)), {}};
    return {std::move(s)};
  }
  return sample_workload(g, c.queries, {c.query_vertices}, c.query_avg_degree, c.query_seed);
}

Store open_store(const RunConfig& c, const Graph& g) {
  const Keys k = stage_keys(c);
  const Manifest m = read_manifest(c.out);
  require_stage(m, "index", k.index);
  return load_store(g, c.out, c.length);
}

int stage_partition(const RunConfig& c, std::ostream& out) {
  const Keys k = stage_keys(c);
  Manifest m = read_manifest(c.out);
  if (manifest_has(m, "partition", k.partition) && fs::exists(assignment_file(c.out))) {
    out << "partition: up to date\n";
    return 0;
  }
  const Graph g = load_graph(c);
  const auto parts = partition_graph(g, c.partition_size);
  const auto assignment = assignment_of(parts, g.vertex_count());
  fs::create_directories(c.out);
  write_text(assignment_file(c.out), format_assignment(assignment));
  m["graph"] = k.graph;
  m["partition"] = k.partition;
  m["partitions"] = std::to_string(parts.size());
  write_manifest(c.out, m);
  out << "partition: " << parts.size() << " partitions, cut " << cut_size(g, assignment)
      << " of " << g.edge_count() << " edges\n";
  return 0;
}

int stage_train(const RunConfig& c, std::ostream& out) {
  validate(c.embedder);
  const Keys k = stage_keys(c);
  Manifest m = read_manifest(c.out);
  require_stage(m, "partition", k.partition);
  const std::size_t parts_n = std::stoul(m.at("partitions"));
  bool fresh = manifest_has(m, "train", k.train);
  for (std::size_t j = 0; j < parts_n && fresh; ++j) fresh = fs::exists(model_file(c.out, j));
  if (fresh) {
    out << "train: up to date\n";
    return 0;
  }
  const Graph g = load_graph(c);
  const auto parts = load_partitions(g, c.out);
  std::vector<TrainedEmbedder> models(parts.size());
  for (std::size_t j = 0; j < parts.size(); ++j) {
    const auto ep = expand(g, parts[j], c.length);
    models[j] = train_embedder(g, ep.vertices, c.embedder, partition_seed(c.seed, j));
    write_text(model_file(c.out, j), serialize_embedder(models[j]));
    out << "train: partition " << j << " vertices " << ep.vertices.size() << " primary epochs "
        << models[j].primary.epochs << " cost " << num(models[j].primary.cost) << '\n';
  }
  m["train"] = k.train;
  m.erase("index");
  write_manifest(c.out, m);
  return 0;
}

int stage_index(const RunConfig& c, std::ostream& out) {
  const Keys k = stage_keys(c);
  Manifest m = read_manifest(c.out);
  require_stage(m, "train", k.train);
  const std::size_t parts_n = std::stoul(m.at("partitions"));
  bool fresh = manifest_has(m, "index", k.index);
  for (std::size_t j = 0; j < parts_n && fresh; ++j) fresh = fs::exists(index_file(c.out, j));
  if (fresh) {
    out << "index: up to date\n";
    return 0;
  }
  const Graph g = load_graph(c);
  const auto parts = load_partitions(g, c.out);
  for (std::size_t j = 0; j < parts.size(); ++j) {
    const auto t = deserialize_embedder(read_text(model_file(c.out, j)));
    const auto a = build_partition(g, parts[j], c.length, t, c.index);
    if (auto why = a.index.audit(); !why.empty()) throw StageError("index audit failed: " + why);
    write_text(index_file(c.out, j), a.index.serialize(j, c.length));
    out << "index: partition " << j << " paths " << a.index.records().size() << " height "
        << a.index.height() << '\n';
  }
  m["index"] = k.index;
  write_manifest(c.out, m);
  return 0;
}

int stage_plan(const RunConfig& c, std::ostream& out) {
  const Graph g = load_graph(c);
  const auto qs = workload(c, g);
  std::optional<Store> store;
  if (c.weight == WeightMode::kDominance) store = open_store(c, g);
  const auto opts = c.match_options();
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const auto& q = qs[i].graph;
    QueryPlan plan;
    if (store) {
      plan = match(q, *store, opts).plan;
    } else {
      plan = select_plan(q, c.length, opts.plan);
    }
    out << "query " << i << (plan.fallback ? " fallback" : "") << '\n' << format_plan(plan);
  }
  return 0;
}

int stage_query(const RunConfig& c, std::ostream& out) {
  const Graph g = load_graph(c);
  const Store s = open_store(c, g);
  const auto qs = workload(c, g);
  std::size_t total = 0;
  double ms = 0.0;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const auto o = match(qs[i].graph, s, c.match_options());
    out << "query " << i << '\n';
    for (const auto& mm : o.matches) out << format_mapping(mm) << '\n';
    total += o.matches.size();
    ms += o.filter_ms + o.refine_ms;
  }
  out << "# queries " << qs.size() << " matches " << total << " total_ms " << num(ms) << '\n';
  return 0;
}

int stage_bench(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Graph g = load_graph(c);
  const Store s = open_store(c, g);
  const auto qs = workload(c, g);
  std::ostringstream csv;
  csv << csv_header() << '\n';
  double pp = 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const auto o = match(qs[i].graph, s, c.match_options());
    const bool exact = oracle_match(qs[i].graph, g, c.oracle_budget) == o.matches;
    const auto met = metrics_of(i, o, exact);
    pp += met.pruning_power;
    ok += exact;
    csv << csv_row(met) << '\n';
  }
  out << csv.str();
  write_text((fs::path(c.out) / "bench.csv").string(), csv.str());
  err << "bench: " << qs.size() << " queries, mean pruning power "
      << num(qs.empty() ? 0.0 : pp / static_cast<double>(qs.size())) << ", oracle agreement " << ok
      << "/" << qs.size() << '\n';
  return 0;
}

int stage_verify(const RunConfig& c, std::ostream& out) {
  const Graph g = load_graph(c);
  const Store s = open_store(c, g);
  const auto qs = workload(c, g);
  std::size_t tp = 0, reported = 0, truth = 0;
  for (const auto& q : qs) {
    const auto got = match(q.graph, s, c.match_options()).matches;
    const auto want = oracle_match(q.graph, g, c.oracle_budget);
    std::set<Mapping> w(want.begin(), want.end());
    for (const auto& mm : got) tp += w.count(mm);
    reported += got.size();
    truth += want.size();
  }
  const double precision = reported ? static_cast<double>(tp) / reported : 1.0;
  const double recall = truth ? static_cast<double>(tp) / truth : 1.0;
  const bool pass = tp == reported && tp == truth;
  out << "verify: queries " << qs.size() << " reported " << reported << " oracle " << truth
      << " precision " << num(precision) << " recall " << num(recall) << (pass ? " PASS" : " FAIL")
      << '\n';
  return pass ? 0 : 4;
}

int stage_generate(const RunConfig& c, std::ostream& out) {
  if (c.graph.empty()) throw ConfigError("generate needs --graph <path> for the output file");
  const Graph g = synthetic_graph(c.synthetic);
  if (auto parent = fs::path(c.graph).parent_path(); !parent.empty()) fs::create_directories(parent);
  write_graph_file(g, c.graph);
  out << "generate: " << g.vertex_count() << " vertices, " << g.edge_count() << " edges, "
      << c.synthetic.labels << " labels (" << to_string(c.synthetic.distribution) << ")\n";
  return 0;
}

}  // namespace

int run_stage(const std::string& command, const RunConfig& config, std::ostream& out,
              std::ostream& err) {
  try {
    if (config.threads > 0) kernels::set_threads(config.threads);
    if (command == "generate") return stage_generate(config, out);
    if (command == "partition") return stage_partition(config, out);
    if (command == "train") return stage_train(config, out);
    if (command == "index") return stage_index(config, out);
    if (command == "plan") return stage_plan(config, out);
    if (command == "query") return stage_query(config, out);
    if (command == "bench") return stage_bench(config, out, err);
    if (command == "verify") return stage_verify(config, out);
    err << "unknown command '" << command << "'\n";
    return 64;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const StageError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace gnnpe
