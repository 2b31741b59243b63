#include "gnnpe/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gnnpe/random.hpp"

namespace gnnpe {

LabelDistribution parse_label_distribution(const std::string& name) {
  if (name == "uniform") return LabelDistribution::kUniform;
  if (name == "gaussian") return LabelDistribution::kGaussian;
  if (name == "zipf") return LabelDistribution::kZipf;
  throw std::invalid_argument("unknown label distribution '" + name + "'");
}

std::string to_string(LabelDistribution d) {
  switch (d) {
    case LabelDistribution::kUniform:
      return "uniform";
    case LabelDistribution::kGaussian:
      return "gaussian";
    case LabelDistribution::kZipf:
      return "zipf";
  }
  return "uniform";
}

Graph newman_watts_strogatz(std::size_t n, std::size_t k, double p, std::uint64_t seed) {
  if (k == 0 || k % 2 != 0 || k >= n) throw std::invalid_argument("NWS: k must be even and < n");
  Rng rng(seed);
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t j = 1; j <= k / 2; ++j) {
      edges.emplace_back(static_cast<VertexId>(v), static_cast<VertexId>((v + j) % n));
    }
  }
  const std::size_t lattice = edges.size();
  for (std::size_t i = 0; i < lattice; ++i) {
    if (uniform_unit(rng) >= p) continue;
    const VertexId u = edges[i].first;
    VertexId w;
    do {
      w = static_cast<VertexId>(uniform_index(rng, n));
    } while (w == u);
    edges.emplace_back(u, w);
  }
  return Graph(std::vector<Label>(n, 1), edges, 1);
}

std::vector<Label> draw_labels(std::size_t n, Label labels, LabelDistribution d,
                               std::uint64_t seed) {
  if (labels == 0) throw std::invalid_argument("labels must be positive");
  Rng rng(seed);
  std::vector<Label> out(n);
  std::vector<double> cdf;
  if (d == LabelDistribution::kZipf) {
    double s = 0.0;
    for (Label r = 1; r <= labels; ++r) cdf.push_back(s += 1.0 / r);
    for (double& c : cdf) c /= s;
  }
  for (auto& l : out) {
    switch (d) {
      case LabelDistribution::kUniform:
        l = static_cast<Label>(uniform_index(rng, labels)) + 1;
        break;
      case LabelDistribution::kGaussian: {
        // Box-Muller on our own uniforms keeps the draw portable.
        const double u1 = 1.0 - uniform_unit(rng), u2 = uniform_unit(rng);
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        const double x = std::round(labels / 2.0 + z * labels / 6.0);
        l = static_cast<Label>(std::clamp(x, 1.0, static_cast<double>(labels)));
        break;
      }
      case LabelDistribution::kZipf: {
        const double u = uniform_unit(rng);
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        l = static_cast<Label>(std::min<std::size_t>(it - cdf.begin(), labels - 1)) + 1;
        break;
      }
    }
  }
  return out;
}

Graph synthetic_graph(const SyntheticSpec& spec) {
  if (spec.average_degree < 2.0) throw std::invalid_argument("NWS: average degree below 2");
  // Largest even k not above the target (at least 2), shortcuts for the rest.
  const std::size_t k =
      2 * std::max<std::size_t>(1, static_cast<std::size_t>(spec.average_degree / 2.0));
  const double p =
      std::min(1.0, (spec.average_degree - static_cast<double>(k)) / static_cast<double>(k));
  const Graph ring = newman_watts_strogatz(spec.vertices, k, p, mix_seed(spec.seed, 1));
  auto labels = draw_labels(spec.vertices, spec.labels, spec.distribution, mix_seed(spec.seed, 2));
  const auto edges = ring.edges();
  return Graph(std::move(labels), edges, spec.labels);
}

}  // namespace gnnpe
