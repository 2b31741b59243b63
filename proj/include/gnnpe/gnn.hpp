#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gnnpe/graph.hpp"

namespace gnnpe {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a model does not reach zero dominance loss in max_epochs.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Embedding = std::vector<double>;

struct EmbedderConfig {
  std::size_t input_dim = 1;       // F
  std::size_t heads = 3;           // K
  std::size_t hidden_dim = 32;     // F'
  std::size_t embedding_dim = 2;   // d
  double learning_rate = 0.001;    // Adam step size
  std::size_t batch_size = 256;
  std::size_t theta = 10;          // degree cutoff for substructure enumeration
  std::size_t restarts = 1;        // b
  std::size_t auxiliary_models = 2;  // n
  std::size_t max_epochs = 500;
};

struct CapacityReport {
  std::size_t capacity = 0;  // depth (3) * width (K * F')
  std::size_t bound = 0;     // (theta + 1)^2
  bool pass = false;
  std::int64_t margin() const {
    return static_cast<std::int64_t>(capacity) - static_cast<std::int64_t>(bound);
  }
};

/// Model capacity against the largest training star: pass iff
/// 3 * K * F' >= (theta + 1)^2.
CapacityReport capacity_check(const EmbedderConfig& config);

/// Throws ConfigError on zero dimensions, F != 1, or a failed capacity check.
void validate(const EmbedderConfig& config);

/// Network input: center feature and the sorted leaf features. Features are
/// label / |Σ| after an optional label permutation.
struct StarFeatures {
  double center = 0.0;
  std::vector<double> leaves;  // ascending
};

double label_feature(Label label, Label domain);
StarFeatures star_features(const StarGraph& star, std::span<const Label> label_map, Label domain);
StarFeatures star_features(const StarSubstructure& star, std::span<const Label> label_map,
                           Label domain);

/// GAT layer (K heads, self-inclusive neighborhoods, LeakyReLU(0.2) scorer,
/// Sigmoid aggregation), sum readout, fully connected Sigmoid output.
///
/// Parameters are stored flat: per-head W (F'×F), per-head attention vector
/// [a_src ‖ a_dst] (2F'), then the d×(K·F') output matrix.
class GnnModel {
 public:
  GnnModel() = default;
  explicit GnnModel(const EmbedderConfig& config);

  std::size_t heads() const { return heads_; }
  std::size_t hidden_dim() const { return hidden_; }
  std::size_t input_dim() const { return input_; }
  std::size_t embedding_dim() const { return out_; }
  std::size_t width() const { return heads_ * hidden_; }
  static constexpr std::size_t depth() { return 3; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  std::size_t w_offset(std::size_t head) const { return head * hidden_ * input_; }
  std::size_t att_offset(std::size_t head) const {
    return heads_ * hidden_ * input_ + head * 2 * hidden_;
  }
  std::size_t fc_offset() const { return heads_ * hidden_ * input_ + heads_ * 2 * hidden_; }

 private:
  std::size_t input_ = 1, heads_ = 3, hidden_ = 32, out_ = 2;
  std::vector<double> params_;
};

struct InitOptions {
  /// Output matrix set to zero: every embedding becomes exactly 0.5.
  bool zero_output_weights = false;
};

/// Uniform(-r, r), r = 1/sqrt(fan_in), for the attention layer and Uniform(0, r)
/// for the output matrix; seeded.
GnnModel init_model(const EmbedderConfig& config, std::uint64_t seed, InitOptions options = {});

/// Intermediate values of one forward pass, kept for backpropagation.
struct ForwardCache {
  std::size_t leaves = 0;
  std::vector<double> h;         // (n+1) × K × F'
  std::vector<double> src, dst;  // (n+1) × K attention halves
  std::vector<double> alpha_center, pre_center;  // K × (n+1): self, then leaves
  std::vector<double> alpha_leaf, pre_leaf;      // n × K × 2: self, then center
  std::vector<double> act;       // (n+1) × K × F'
  std::vector<double> y;         // K × F'
  Embedding out;                 // d
};

/// Forward pass with no degree limit.
Embedding forward(const GnnModel& model, const StarFeatures& star);
void forward(const GnnModel& model, const StarFeatures& star, ForwardCache& cache);

/// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
void backward(const GnnModel& model, const StarFeatures& star, const ForwardCache& cache,
              std::span<const double> d_out, std::span<double> grad);

/// Forward pass for inputs within the degree cutoff; throws otherwise.
Embedding embed_star(const GnnModel& model, const StarFeatures& star, std::size_t theta);

/// ‖max(0, child - parent)‖².
double pair_loss(std::span<const double> child, std::span<const double> parent);

/// Loss and gradient of one (parent, child) pair; the gradient is
/// accumulated into `grad`.
double pair_loss_gradient(const GnnModel& model, const StarFeatures& parent,
                          const StarFeatures& child, std::span<double> grad);

/// Training pairs as indices into deduplicated parent/child feature tables.
struct TrainingSet {
  std::vector<VertexId> vertices;  // one per parent, ascending
  std::vector<StarFeatures> parents;
  std::vector<StarFeatures> children;
  struct Pair {
    std::uint32_t parent;
    std::uint32_t child;
  };
  std::vector<Pair> pairs;
  /// Vertices above the degree cutoff; they take the all-ones embedding.
  std::vector<VertexId> high_degree;
};

/// Stars of `vertices` (taken from the whole graph) and all their
/// substructures, with labels mapped through label_map.
TrainingSet build_training_set(const Graph& g, std::span<const VertexId> vertices,
                               std::span<const Label> label_map, std::size_t theta);

/// Σ‖max(0, o(s) - o(g))‖² over the given pairs.
double dominance_loss(const GnnModel& model, const TrainingSet& set,
                      std::span<const TrainingSet::Pair> batch);

/// Adam with β1 = 0.9, β2 = 0.999, ε = 1e-8.
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t params, double learning_rate);
  void step(std::span<double> params, std::span<const double> grad);
  std::size_t steps() const { return t_; }

 private:
  double lr_;
  std::size_t t_ = 0;
  std::vector<double> m_, v_;
};

/// Epoch statistics of the full test pass over a training set.
struct TestEpoch {
  double loss = 0.0;
  std::size_t violating_pairs = 0;  // pairs with some o(s)[t] > o(g)[t]
};

struct TrainOutcome {
  GnnModel model;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  bool converged = false;
  TestEpoch last_test;
  double cost = 0.0;
};

/// Trains one model from `seed` until the test epoch has no violating pair
/// or max_epochs pass.
TrainOutcome train_model(const TrainingSet& set, const EmbedderConfig& config,
                         std::uint64_t seed);

/// Mean, over every pair's child treated as a query star, of the number of
/// vertices whose embedding it dominates (high-degree vertices always count).
double model_query_cost(const GnnModel& model, const TrainingSet& set);

/// One trained model together with the label permutation it was trained on.
struct EmbedderFamily {
  GnnModel model;
  std::uint64_t init_seed = 0;
  std::uint64_t label_seed = 0;  // 0 = identity labels
  std::vector<Label> label_map;
  std::size_t epochs = 0;
  double cost = 0.0;
};

/// Primary plus auxiliary models of one partition with cached node and
/// label embeddings. Immutable after training.
class TrainedEmbedder {
 public:
  EmbedderConfig config;
  Label label_domain = 0;
  EmbedderFamily primary;
  std::vector<EmbedderFamily> auxiliary;

  /// Vertices with cached embeddings (sorted) and their rows, each
  /// (1 + auxiliary.size()) × d: primary first.
  std::vector<VertexId> vertices;
  std::vector<double> node_rows;
  std::map<Label, Embedding> label_table;

  std::size_t families() const { return 1 + auxiliary.size(); }
  const EmbedderFamily& family(std::size_t which) const {
    return which == 0 ? primary : auxiliary.at(which - 1);
  }
  std::ptrdiff_t row_of(VertexId v) const;
  std::span<const double> cached(std::size_t row, std::size_t which) const;

  /// Keeps the first `n` auxiliary models (same primary, same caches).
  TrainedEmbedder with_auxiliary_count(std::size_t n) const;
};

/// Trains the primary model (b restarts, lowest cost wins) and n auxiliary
/// models on label-permuted copies, then caches embeddings of `vertices`.
/// Throws TrainingError when no restart of some model converges.
TrainedEmbedder train_embedder(const Graph& g, std::span<const VertexId> vertices,
                               const EmbedderConfig& config, std::uint64_t seed);

/// Builds a TrainedEmbedder around given models without training (used for
/// fixed-weight configurations such as the zero-output special case). An
/// empty label_map is filled from label_seed.
TrainedEmbedder assemble_embedder(const Graph& g, std::span<const VertexId> vertices,
                                  const EmbedderConfig& config, EmbedderFamily primary,
                                  std::vector<EmbedderFamily> auxiliary);

/// Embedding of v under model `which` (0 = primary): the cached value, or
/// computed from g; all ones when deg(v) > theta.
Embedding node_embedding(const TrainedEmbedder& t, const Graph& g, VertexId v, std::size_t which);

/// Embedding of an isolated vertex carrying `label` under the primary model;
/// nullopt for labels that do not occur among the cached vertices.
std::optional<Embedding> label_embedding(const TrainedEmbedder& t, Label label);

/// Embedding of an arbitrary star (e.g. a query vertex) under model `which`.
Embedding embed_with(const TrainedEmbedder& t, std::size_t which, Label center,
                     std::span<const Label> neighbor_labels);

/// Post-hoc certificate: recomputes every (g, s) pair for every model from
/// scratch and counts pairs violating o(s) ⪯ o(g).
std::size_t audit_certificate(const TrainedEmbedder& t, const Graph& g);

/// Text persistence with shortest round-trip decimal floats.
std::string serialize_embedder(const TrainedEmbedder& t);
TrainedEmbedder deserialize_embedder(const std::string& text);

}  // namespace gnnpe
