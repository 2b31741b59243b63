#pragma once

#include <cstdint>
#include <string>

#include "gnnpe/graph.hpp"

namespace gnnpe {

enum class LabelDistribution { kUniform, kGaussian, kZipf };

LabelDistribution parse_label_distribution(const std::string& name);
std::string to_string(LabelDistribution d);

struct SyntheticSpec {
  std::size_t vertices = 1000;
  double average_degree = 4.4;
  Label labels = 100;
  LabelDistribution distribution = LabelDistribution::kUniform;
  std::uint64_t seed = 1;
};

/// Newman-Watts-Strogatz small world: ring lattice where every vertex links
/// to its k/2 nearest neighbors on each side, plus for every lattice edge a
/// shortcut to a uniform random vertex with probability p. k and p are
/// chosen so the expected average degree k(1 + p) hits the target, with k the
/// largest even number not above it.
Graph newman_watts_strogatz(std::size_t n, std::size_t k, double p, std::uint64_t seed);

/// Labels in [1, labels]: uniform, rounded normal(mean |Σ|/2, sd |Σ|/6)
/// clamped into range, or Zipf with exponent 1.
std::vector<Label> draw_labels(std::size_t n, Label labels, LabelDistribution d,
                               std::uint64_t seed);

Graph synthetic_graph(const SyntheticSpec& spec);

}  // namespace gnnpe
