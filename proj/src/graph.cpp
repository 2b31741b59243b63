#include "gnnpe/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

#include "gnnpe/random.hpp"

namespace gnnpe {

Graph::Graph(std::vector<Label> labels, std::span<const std::pair<VertexId, VertexId>> edges,
             Label label_domain_size)
    : labels_(std::move(labels)), adjacency_(labels_.size()) {
  const Label max_label = labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end());
  label_domain_size_ = label_domain_size == 0 ? max_label : label_domain_size;
  for (Label l : labels_) {
    if (l < 1 || l > label_domain_size_) {
      throw GraphError("label " + std::to_string(l) + " outside [1, " +
                       std::to_string(label_domain_size_) + "]");
    }
  }
  const auto n = labels_.size();
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) {
      throw GraphError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                       ") references a missing vertex");
    }
    if (u == v) throw GraphError("self-loop at vertex " + std::to_string(u));
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    edge_count_ += adj.size();
  }
  edge_count_ /= 2;
}

bool Graph::has_edge(VertexId u, VertexId v) const {
  const auto& adj = adjacency_[u];
  return std::binary_search(adj.begin(), adj.end(), v);
}

double Graph::average_degree() const {
  return labels_.empty() ? 0.0 : 2.0 * static_cast<double>(edge_count_) / labels_.size();
}

std::vector<std::pair<VertexId, VertexId>> Graph::edges() const {
  std::vector<std::pair<VertexId, VertexId>> out;
  out.reserve(edge_count_);
  for (VertexId u = 0; u < adjacency_.size(); ++u) {
    for (VertexId v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

bool Graph::is_connected() const {
  if (labels_.empty()) return false;
  std::vector<char> seen(labels_.size(), 0);
  std::vector<VertexId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    VertexId u = stack.back();
    stack.pop_back();
    for (VertexId v : adjacency_[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == labels_.size();
}

QueryGraph::QueryGraph(Graph g) : Graph(std::move(g)) {
  if (vertex_count() == 0) throw GraphError("query graph has no vertices");
  if (!is_connected()) throw GraphError("query graph is not connected");
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::uint64_t parse_uint(std::string_view s, std::size_t line_no) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw GraphError("line " + std::to_string(line_no) + ": expected a non-negative integer, got '" +
                     std::string(s) + "'");
  }
  return value;
}

}  // namespace

Graph parse_graph(std::string_view text) {
  std::size_t line_no = 0;
  bool have_header = false;
  std::uint64_t declared_v = 0, declared_e = 0;
  std::vector<Label> labels;
  std::vector<std::uint64_t> declared_degree;
  std::vector<char> seen_vertex;
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::size_t vertex_lines = 0, edge_lines = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto f = split_fields(line);
    if (f.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (f[0] == "t") {
      if (have_header || f.size() != 3) throw GraphError(where + "malformed header");
      declared_v = parse_uint(f[1], line_no);
      declared_e = parse_uint(f[2], line_no);
      labels.assign(declared_v, 0);
      declared_degree.assign(declared_v, 0);
      seen_vertex.assign(declared_v, 0);
      have_header = true;
    } else if (!have_header) {
      throw GraphError(where + "record before the 't' header");
    } else if (f[0] == "v") {
      if (f.size() != 4) throw GraphError(where + "malformed vertex line");
      auto id = parse_uint(f[1], line_no);
      auto label = parse_uint(f[2], line_no);
      if (id >= declared_v) throw GraphError(where + "vertex id out of range");
      if (seen_vertex[id]) throw GraphError(where + "duplicate vertex id");
      if (label < 1 || label > UINT32_MAX) throw GraphError(where + "label must be >= 1");
      seen_vertex[id] = 1;
      labels[id] = static_cast<Label>(label);
      declared_degree[id] = parse_uint(f[3], line_no);
      ++vertex_lines;
    } else if (f[0] == "e") {
      if (f.size() != 3) throw GraphError(where + "malformed edge line");
      auto u = parse_uint(f[1], line_no);
      auto v = parse_uint(f[2], line_no);
      if (u >= declared_v || v >= declared_v) {
        throw GraphError(where + "edge references a missing vertex");
      }
      if (u == v) throw GraphError(where + "self-loop at vertex " + std::to_string(u));
      edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
      ++edge_lines;
    } else {
      throw GraphError(where + "unknown record type '" + std::string(f[0]) + "'");
    }
  }
  if (!have_header) throw GraphError("missing 't' header");
  if (vertex_lines != declared_v) {
    throw GraphError("header declares " + std::to_string(declared_v) + " vertices, found " +
                     std::to_string(vertex_lines));
  }
  if (edge_lines != declared_e) {
    throw GraphError("header declares " + std::to_string(declared_e) + " edges, found " +
                     std::to_string(edge_lines));
  }
  Graph g(std::move(labels), edges);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (declared_degree[v] != g.degree(v)) {
      throw GraphError("vertex " + std::to_string(v) + " declares degree " +
                       std::to_string(declared_degree[v]) + ", actual " +
                       std::to_string(g.degree(v)));
    }
  }
  return g;
}

Graph read_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open graph file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

std::string format_graph(const Graph& g) {
  std::string out;
  out += "t " + std::to_string(g.vertex_count()) + " " + std::to_string(g.edge_count()) + "\n";
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    out += "v " + std::to_string(v) + " " + std::to_string(g.label(v)) + " " +
           std::to_string(g.degree(v)) + "\n";
  }
  for (auto [u, v] : g.edges()) {
    out += "e " + std::to_string(u) + " " + std::to_string(v) + "\n";
  }
  return out;
}

void write_graph_file(const Graph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GraphError("cannot write graph file " + path);
  out << format_graph(g);
}

StarGraph extract_unit_star(const Graph& g, VertexId v) {
  if (v >= g.vertex_count()) throw GraphError("vertex id " + std::to_string(v) + " out of range");
  StarGraph star{v, g.label(v), {}};
  star.neighbors.reserve(g.degree(v));
  for (VertexId u : g.neighbors(v)) star.neighbors.emplace_back(u, g.label(u));
  return star;
}

std::vector<StarSubstructure> enumerate_substructures(const StarGraph& star, std::size_t theta) {
  const std::size_t deg = star.neighbors.size();
  if (deg > theta) {
    throw GraphError("star at vertex " + std::to_string(star.center) + " has degree " +
                     std::to_string(deg) + " > theta " + std::to_string(theta));
  }
  auto sorted = star.neighbors;
  std::sort(sorted.begin(), sorted.end());
  std::vector<StarSubstructure> out;
  out.reserve(std::size_t{1} << deg);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << deg); ++mask) {
    StarSubstructure s{star.center, star.center_label, {}};
    for (std::size_t i = 0; i < deg; ++i) {
      if (mask >> i & 1) s.neighbors.push_back(sorted[i]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

void extend_paths(const Graph& g, std::vector<VertexId>& current, std::vector<char>& on_path,
                  std::size_t length, std::vector<Path>& out) {
  if (current.size() == length + 1) {
    out.push_back(Path{current});
    return;
  }
  for (VertexId next : g.neighbors(current.back())) {
    if (on_path[next]) continue;
    on_path[next] = 1;
    current.push_back(next);
    extend_paths(g, current, on_path, length, out);
    current.pop_back();
    on_path[next] = 0;
  }
}

}  // namespace

std::vector<Path> enumerate_paths(const Graph& g, std::span<const VertexId> anchors,
                                  std::size_t length) {
  std::vector<Path> out;
  std::vector<char> on_path(g.vertex_count(), 0);
  std::vector<VertexId> current;
  for (VertexId a : anchors) {
    if (a >= g.vertex_count()) throw GraphError("anchor out of range");
    current.assign(1, a);
    on_path[a] = 1;
    extend_paths(g, current, on_path, length, out);
    on_path[a] = 0;
  }
  return out;
}

std::vector<Label> label_permutation(Label domain, std::uint64_t seed) {
  std::vector<Label> perm(domain + 1);
  std::iota(perm.begin(), perm.end(), Label{0});
  if (seed == 0 || domain < 2) return perm;
  Rng rng(seed);
  shuffle(std::span<Label>(perm).subspan(1), rng);
  return perm;
}

Graph randomize_labels(const Graph& g, std::uint64_t seed) {
  auto perm = label_permutation(g.label_domain_size(), seed);
  std::vector<Label> labels(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) labels[v] = perm[g.label(v)];
  auto edges = g.edges();
  return Graph(std::move(labels), edges, g.label_domain_size());
}

namespace {

bool connected_without(std::size_t n, const std::vector<std::pair<VertexId, VertexId>>& edges,
                       std::size_t skip) {
  std::vector<std::vector<VertexId>> adj(n);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (i == skip) continue;
    adj[edges[i].first].push_back(edges[i].second);
    adj[edges[i].second].push_back(edges[i].first);
  }
  std::vector<char> seen(n, 0);
  std::vector<VertexId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (auto v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == n;
}

}  // namespace

SampledQuery sample_query_graph(const Graph& g, std::size_t vertex_count, double avg_degree,
                                std::uint64_t seed, std::size_t max_restarts) {
  if (vertex_count < 2) throw GraphError("query graphs need at least 2 vertices");
  if (g.vertex_count() < vertex_count) throw GraphError("data graph smaller than query size");
  const auto target_edges =
      static_cast<std::size_t>(std::floor(avg_degree * static_cast<double>(vertex_count) / 2.0));
  if (target_edges + 1 < vertex_count) {
    throw GraphError("average degree too low for a connected query graph");
  }
  Rng rng(seed);
  const std::size_t step_limit = 200 * vertex_count;
  for (std::size_t attempt = 0; attempt <= max_restarts; ++attempt) {
    VertexId current = static_cast<VertexId>(uniform_index(rng, g.vertex_count()));
    std::vector<VertexId> visited{current};
    for (std::size_t step = 0; step < step_limit && visited.size() < vertex_count; ++step) {
      auto adj = g.neighbors(current);
      if (adj.empty()) break;
      current = adj[uniform_index(rng, adj.size())];
      if (std::find(visited.begin(), visited.end(), current) == visited.end()) {
        visited.push_back(current);
      }
    }
    if (visited.size() < vertex_count) continue;

    std::vector<std::pair<VertexId, VertexId>> edges;
    for (VertexId i = 0; i < vertex_count; ++i) {
      for (VertexId j = i + 1; j < vertex_count; ++j) {
        if (g.has_edge(visited[i], visited[j])) edges.emplace_back(i, j);
      }
    }
    if (edges.size() < target_edges) continue;

    bool stuck = false;
    while (edges.size() > target_edges) {
      std::vector<std::size_t> removable;
      for (std::size_t i = 0; i < edges.size(); ++i) {
        if (connected_without(vertex_count, edges, i)) removable.push_back(i);
      }
      if (removable.empty()) {
        stuck = true;
        break;
      }
      edges.erase(edges.begin() +
                  static_cast<std::ptrdiff_t>(removable[uniform_index(rng, removable.size())]));
    }
    if (stuck) continue;

    std::vector<Label> labels(vertex_count);
    for (std::size_t i = 0; i < vertex_count; ++i) labels[i] = g.label(visited[i]);
    Graph q(std::move(labels), edges, g.label_domain_size());
    return SampledQuery{QueryGraph(std::move(q)), std::move(visited)};
  }
  throw GraphError("query sampling budget exhausted after " + std::to_string(max_restarts) +
                   " restarts");
}

}  // namespace gnnpe
