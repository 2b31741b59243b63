#include "gnnpe/gnn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gnnpe/kernels.hpp"
#include "gnnpe/random.hpp"

namespace gnnpe {

namespace {

constexpr double kLeakySlope = 0.2;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double leaky(double x) { return x > 0.0 ? x : kLeakySlope * x; }
inline double leaky_grad(double x) { return x > 0.0 ? 1.0 : kLeakySlope; }

}  // namespace

CapacityReport capacity_check(const EmbedderConfig& config) {
  CapacityReport r;
  r.capacity = GnnModel::depth() * config.heads * config.hidden_dim;
  r.bound = (config.theta + 1) * (config.theta + 1);
  r.pass = r.capacity >= r.bound;
  return r;
}

void validate(const EmbedderConfig& c) {
  if (c.input_dim != 1) {
    throw ConfigError("input_dim must be 1 (vertex label encoding)");
  }
  if (c.heads == 0 || c.hidden_dim == 0 || c.embedding_dim == 0 || c.batch_size == 0 ||
      c.restarts == 0 || c.max_epochs == 0) {
    throw ConfigError("embedder dimensions, batch size, restarts and epochs must be positive");
  }
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (c.theta > 20) throw ConfigError("theta above 20 would enumerate > 2^20 substructures");
  auto cap = capacity_check(c);
  if (!cap.pass) {
    throw ConfigError("model capacity " + std::to_string(cap.capacity) +
                      " (3 layers x K*F') is below the (theta+1)^2 = " +
                      std::to_string(cap.bound) + " needed to overfit stars of degree theta");
  }
}

double label_feature(Label label, Label domain) {
  return static_cast<double>(label) / static_cast<double>(domain);
}

namespace {

template <typename Star>
StarFeatures features_of(const Star& star, std::span<const Label> label_map, Label domain) {
  StarFeatures f;
  f.center = label_feature(label_map[star.center_label], domain);
  f.leaves.reserve(star.neighbors.size());
  for (auto [v, l] : star.neighbors) f.leaves.push_back(label_feature(label_map[l], domain));
  std::sort(f.leaves.begin(), f.leaves.end());
  return f;
}

}  // namespace

StarFeatures star_features(const StarGraph& star, std::span<const Label> label_map,
                           Label domain) {
  return features_of(star, label_map, domain);
}

StarFeatures star_features(const StarSubstructure& star, std::span<const Label> label_map,
                           Label domain) {
  return features_of(star, label_map, domain);
}

GnnModel::GnnModel(const EmbedderConfig& c)
    : input_(c.input_dim), heads_(c.heads), hidden_(c.hidden_dim), out_(c.embedding_dim) {
  params_.assign(heads_ * hidden_ * input_ + heads_ * 2 * hidden_ + out_ * heads_ * hidden_, 0.0);
}

GnnModel init_model(const EmbedderConfig& config, std::uint64_t seed, InitOptions options) {
  GnnModel m(config);
  Rng rng(seed);
  auto p = m.params();
  auto fill = [&](std::size_t begin, std::size_t end, double fan_in, double lo_scale) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (std::size_t i = begin; i < end; ++i) p[i] = uniform_real(rng, lo_scale * bound, bound);
  };
  fill(0, m.att_offset(0), static_cast<double>(m.input_dim()), -1.0);
  fill(m.att_offset(0), m.fc_offset(), 2.0 * static_cast<double>(m.hidden_dim()), -1.0);
  if (options.zero_output_weights) {
    std::fill(p.begin() + static_cast<std::ptrdiff_t>(m.fc_offset()), p.end(), 0.0);
  } else {
    // Readout activations are positive, so a nonnegative output matrix makes
    // the initial embedding grow with the leaf set.
    fill(m.fc_offset(), p.size(), static_cast<double>(m.width()), 0.0);
  }
  return m;
}

void forward(const GnnModel& model, const StarFeatures& star, ForwardCache& c) {
  const std::size_t n = star.leaves.size();
  const std::size_t V = n + 1, K = model.heads(), H = model.hidden_dim(), D = model.embedding_dim();
  const auto p = model.params();
  auto x = [&](std::size_t i) { return i == 0 ? star.center : star.leaves[i - 1]; };

  c.leaves = n;
  c.h.resize(V * K * H);
  c.src.resize(V * K);
  c.dst.resize(V * K);
  c.alpha_center.resize(K * V);
  c.pre_center.resize(K * V);
  c.alpha_leaf.resize(n * K * 2);
  c.pre_leaf.resize(n * K * 2);
  c.act.resize(V * K * H);
  c.y.assign(K * H, 0.0);
  c.out.resize(D);

  for (std::size_t i = 0; i < V; ++i) {
    const double xi = x(i);
    for (std::size_t k = 0; k < K; ++k) {
      const double* w = &p[model.w_offset(k)];
      const double* a = &p[model.att_offset(k)];
      double* h = &c.h[(i * K + k) * H];
      double s = 0.0, d = 0.0;
      for (std::size_t f = 0; f < H; ++f) {
        h[f] = w[f] * xi;
        s += a[f] * h[f];
        d += a[H + f] * h[f];
      }
      c.src[i * K + k] = s;
      c.dst[i * K + k] = d;
    }
  }

  for (std::size_t k = 0; k < K; ++k) {
    // Center attends to itself and every leaf.
    double* pre = &c.pre_center[k * V];
    double* alpha = &c.alpha_center[k * V];
    double top = -INFINITY;
    for (std::size_t j = 0; j < V; ++j) {
      pre[j] = c.src[k] + c.dst[j * K + k];
      top = std::max(top, leaky(pre[j]));
    }
    double z = 0.0;
    for (std::size_t j = 0; j < V; ++j) {
      alpha[j] = std::exp(leaky(pre[j]) - top);
      z += alpha[j];
    }
    for (std::size_t j = 0; j < V; ++j) alpha[j] /= z;
    double* act = &c.act[k * H];
    for (std::size_t f = 0; f < H; ++f) {
      double agg = 0.0;
      for (std::size_t j = 0; j < V; ++j) agg += alpha[j] * c.h[(j * K + k) * H + f];
      act[f] = sigmoid(agg);
    }
    // Each leaf attends to itself and the center.
    for (std::size_t i = 1; i < V; ++i) {
      double* lp = &c.pre_leaf[((i - 1) * K + k) * 2];
      double* la = &c.alpha_leaf[((i - 1) * K + k) * 2];
      lp[0] = c.src[i * K + k] + c.dst[i * K + k];
      lp[1] = c.src[i * K + k] + c.dst[k];
      const double e0 = leaky(lp[0]), e1 = leaky(lp[1]);
      const double m = std::max(e0, e1);
      const double x0 = std::exp(e0 - m), x1 = std::exp(e1 - m);
      la[0] = x0 / (x0 + x1);
      la[1] = x1 / (x0 + x1);
      const double* hi = &c.h[(i * K + k) * H];
      const double* hc = &c.h[k * H];
      double* ai = &c.act[(i * K + k) * H];
      for (std::size_t f = 0; f < H; ++f) ai[f] = sigmoid(la[0] * hi[f] + la[1] * hc[f]);
    }
  }

  for (std::size_t i = 0; i < V; ++i) {
    const double* a = &c.act[i * K * H];
    for (std::size_t f = 0; f < K * H; ++f) c.y[f] += a[f];
  }
  const double* fc = &p[model.fc_offset()];
  for (std::size_t t = 0; t < D; ++t) {
    double u = 0.0;
    for (std::size_t f = 0; f < K * H; ++f) u += fc[t * K * H + f] * c.y[f];
    c.out[t] = sigmoid(u);
  }
}

Embedding forward(const GnnModel& model, const StarFeatures& star) {
  ForwardCache c;
  forward(model, star, c);
  return std::move(c.out);
}

void backward(const GnnModel& model, const StarFeatures& star, const ForwardCache& c,
              std::span<const double> d_out, std::span<double> grad) {
  const std::size_t n = c.leaves;
  const std::size_t V = n + 1, K = model.heads(), H = model.hidden_dim(), D = model.embedding_dim();
  const std::size_t W = K * H;
  const auto p = model.params();
  auto x = [&](std::size_t i) { return i == 0 ? star.center : star.leaves[i - 1]; };

  std::vector<double> dy(W, 0.0);
  const double* fc = &p[model.fc_offset()];
  double* gfc = &grad[model.fc_offset()];
  for (std::size_t t = 0; t < D; ++t) {
    const double du = d_out[t] * c.out[t] * (1.0 - c.out[t]);
    if (du == 0.0) continue;
    for (std::size_t f = 0; f < W; ++f) {
      gfc[t * W + f] += du * c.y[f];
      dy[f] += fc[t * W + f] * du;
    }
  }

  std::vector<double> dh(V * W, 0.0), dsrc(V * K, 0.0), ddst(V * K, 0.0), dz(H);
  for (std::size_t k = 0; k < K; ++k) {
    const double* alpha = &c.alpha_center[k * V];
    const double* pre = &c.pre_center[k * V];
    const double* act = &c.act[k * H];
    for (std::size_t f = 0; f < H; ++f) dz[f] = dy[k * H + f] * act[f] * (1.0 - act[f]);
    std::vector<double> dalpha(V, 0.0);
    double weighted = 0.0;
    for (std::size_t j = 0; j < V; ++j) {
      const double* hj = &c.h[(j * K + k) * H];
      double* dhj = &dh[(j * K + k) * H];
      double s = 0.0;
      for (std::size_t f = 0; f < H; ++f) {
        s += dz[f] * hj[f];
        dhj[f] += alpha[j] * dz[f];
      }
      dalpha[j] = s;
      weighted += alpha[j] * s;
    }
    for (std::size_t j = 0; j < V; ++j) {
      const double dpre = alpha[j] * (dalpha[j] - weighted) * leaky_grad(pre[j]);
      dsrc[k] += dpre;
      ddst[j * K + k] += dpre;
    }

    for (std::size_t i = 1; i < V; ++i) {
      const double* la = &c.alpha_leaf[((i - 1) * K + k) * 2];
      const double* lp = &c.pre_leaf[((i - 1) * K + k) * 2];
      const double* ai = &c.act[(i * K + k) * H];
      const double* hi = &c.h[(i * K + k) * H];
      const double* hc = &c.h[k * H];
      double* dhi = &dh[(i * K + k) * H];
      double* dhc = &dh[k * H];
      double da0 = 0.0, da1 = 0.0;
      for (std::size_t f = 0; f < H; ++f) {
        const double g = dy[k * H + f] * ai[f] * (1.0 - ai[f]);
        da0 += g * hi[f];
        da1 += g * hc[f];
        dhi[f] += la[0] * g;
        dhc[f] += la[1] * g;
      }
      const double w = la[0] * da0 + la[1] * da1;
      const double dpre0 = la[0] * (da0 - w) * leaky_grad(lp[0]);
      const double dpre1 = la[1] * (da1 - w) * leaky_grad(lp[1]);
      dsrc[i * K + k] += dpre0 + dpre1;
      ddst[i * K + k] += dpre0;
      ddst[k] += dpre1;
    }
  }

  for (std::size_t k = 0; k < K; ++k) {
    const double* a = &p[model.att_offset(k)];
    double* ga = &grad[model.att_offset(k)];
    double* gw = &grad[model.w_offset(k)];
    for (std::size_t i = 0; i < V; ++i) {
      const double* hi = &c.h[(i * K + k) * H];
      double* dhi = &dh[(i * K + k) * H];
      const double ds = dsrc[i * K + k], dd = ddst[i * K + k];
      const double xi = x(i);
      for (std::size_t f = 0; f < H; ++f) {
        ga[f] += ds * hi[f];
        ga[H + f] += dd * hi[f];
        const double total = dhi[f] + ds * a[f] + dd * a[H + f];
        gw[f] += total * xi;
      }
    }
  }
}

Embedding embed_star(const GnnModel& model, const StarFeatures& star, std::size_t theta) {
  if (star.leaves.size() > theta) {
    throw GraphError("star degree " + std::to_string(star.leaves.size()) + " exceeds theta " +
                     std::to_string(theta));
  }
  return forward(model, star);
}

double pair_loss(std::span<const double> child, std::span<const double> parent) {
  double loss = 0.0;
  for (std::size_t t = 0; t < child.size(); ++t) {
    const double r = std::max(0.0, child[t] - parent[t]);
    loss += r * r;
  }
  return loss;
}

double pair_loss_gradient(const GnnModel& model, const StarFeatures& parent,
                          const StarFeatures& child, std::span<double> grad) {
  thread_local ForwardCache pc, cc;
  forward(model, parent, pc);
  forward(model, child, cc);
  const std::size_t D = model.embedding_dim();
  double loss = 0.0;
  bool any = false;
  thread_local std::vector<double> d_parent, d_child;
  d_parent.assign(D, 0.0);
  d_child.assign(D, 0.0);
  for (std::size_t t = 0; t < D; ++t) {
    const double r = std::max(0.0, cc.out[t] - pc.out[t]);
    loss += r * r;
    if (r > 0.0) {
      any = true;
      d_child[t] = 2.0 * r;
      d_parent[t] = -2.0 * r;
    }
  }
  if (any) {
    backward(model, parent, pc, d_parent, grad);
    backward(model, child, cc, d_child, grad);
  }
  return loss;
}

namespace {

struct FeatureKeyLess {
  bool operator()(const StarFeatures& a, const StarFeatures& b) const {
    if (a.center != b.center) return a.center < b.center;
    return a.leaves < b.leaves;
  }
};

}  // namespace

TrainingSet build_training_set(const Graph& g, std::span<const VertexId> vertices,
                               std::span<const Label> label_map, std::size_t theta) {
  TrainingSet set;
  const Label domain = g.label_domain_size();
  std::map<StarFeatures, std::uint32_t, FeatureKeyLess> child_index;
  std::vector<VertexId> sorted(vertices.begin(), vertices.end());
  std::sort(sorted.begin(), sorted.end());
  for (VertexId v : sorted) {
    if (g.degree(v) > theta) {
      set.high_degree.push_back(v);
      continue;
    }
    auto star = extract_unit_star(g, v);
    const auto parent = static_cast<std::uint32_t>(set.parents.size());
    set.vertices.push_back(v);
    set.parents.push_back(star_features(star, label_map, domain));
    for (const auto& sub : enumerate_substructures(star, theta)) {
      auto f = star_features(sub, label_map, domain);
      auto [it, inserted] =
          child_index.emplace(std::move(f), static_cast<std::uint32_t>(set.children.size()));
      if (inserted) set.children.push_back(it->first);
      set.pairs.push_back({parent, it->second});
    }
  }
  return set;
}

double dominance_loss(const GnnModel& model, const TrainingSet& set,
                      std::span<const TrainingSet::Pair> batch) {
  double loss = 0.0;
  for (const auto& pr : batch) {
    loss += pair_loss(forward(model, set.children[pr.child]), forward(model, set.parents[pr.parent]));
  }
  return loss;
}

AdamOptimizer::AdamOptimizer(std::size_t params, double learning_rate)
    : lr_(learning_rate), m_(params, 0.0), v_(params, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
  }
}

TrainOutcome train_model(const TrainingSet& set, const EmbedderConfig& config,
                         std::uint64_t seed) {
  TrainOutcome out;
  out.seed = seed;
  out.model = init_model(config, seed);
  std::vector<TrainingSet::Pair> order = set.pairs;
  Rng rng(mix_seed(seed, 7));
  shuffle(std::span<TrainingSet::Pair>(order), rng);

  AdamOptimizer adam(out.model.param_count(), config.learning_rate);
  std::vector<double> grad(out.model.param_count());
  const std::span<const TrainingSet::Pair> all(order);
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (std::size_t begin = 0; begin < all.size(); begin += config.batch_size) {
      auto batch = all.subspan(begin, std::min(config.batch_size, all.size() - begin));
      const double loss = kernels::batch_gradient_parallel(out.model, set, batch, grad);
      if (loss > 0.0) adam.step(out.model.params(), grad);
    }
    out.epochs = epoch;
    out.last_test = kernels::test_epoch_parallel(out.model, set);
    if (out.last_test.violating_pairs == 0) {
      out.converged = true;
      break;
    }
  }
  return out;
}

double model_query_cost(const GnnModel& model, const TrainingSet& set) {
  if (set.pairs.empty()) return 0.0;
  const auto children = kernels::embed_all_parallel(model, set.children);
  const auto parents = kernels::embed_all_parallel(model, set.parents);
  std::vector<std::uint64_t> weights(set.children.size(), 0);
  for (const auto& pr : set.pairs) ++weights[pr.child];
  const std::uint64_t dominated = kernels::weighted_dominance_count_parallel(
      children, weights, parents, model.embedding_dim());
  const double pairs = static_cast<double>(set.pairs.size());
  return static_cast<double>(dominated) / pairs + static_cast<double>(set.high_degree.size());
}

std::ptrdiff_t TrainedEmbedder::row_of(VertexId v) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
  if (it == vertices.end() || *it != v) return -1;
  return it - vertices.begin();
}

std::span<const double> TrainedEmbedder::cached(std::size_t row, std::size_t which) const {
  const std::size_t d = config.embedding_dim;
  return std::span<const double>(node_rows).subspan((row * families() + which) * d, d);
}

TrainedEmbedder TrainedEmbedder::with_auxiliary_count(std::size_t n) const {
  if (n > auxiliary.size()) throw ConfigError("not enough auxiliary models");
  TrainedEmbedder t;
  t.config = config;
  t.config.auxiliary_models = n;
  t.label_domain = label_domain;
  t.primary = primary;
  t.auxiliary.assign(auxiliary.begin(), auxiliary.begin() + static_cast<std::ptrdiff_t>(n));
  t.vertices = vertices;
  t.label_table = label_table;
  const std::size_t d = config.embedding_dim;
  t.node_rows.reserve(vertices.size() * (1 + n) * d);
  for (std::size_t r = 0; r < vertices.size(); ++r) {
    for (std::size_t w = 0; w <= n; ++w) {
      auto e = cached(r, w);
      t.node_rows.insert(t.node_rows.end(), e.begin(), e.end());
    }
  }
  return t;
}

namespace {

EmbedderFamily train_family(const Graph& g, std::span<const VertexId> vertices,
                            const EmbedderConfig& config, std::uint64_t seed,
                            std::uint64_t label_seed, std::size_t family_index) {
  EmbedderFamily fam;
  fam.label_seed = label_seed;
  fam.label_map = label_permutation(g.label_domain_size(), label_seed);
  const auto set = build_training_set(g, vertices, fam.label_map, config.theta);
  bool found = false;
  std::size_t total_epochs = 0;
  for (std::size_t r = 0; r < config.restarts; ++r) {
    const std::uint64_t init_seed = mix_seed(seed, family_index * 1000 + r);
    auto outcome = train_model(set, config, init_seed);
    total_epochs += outcome.epochs;
    if (!outcome.converged) continue;
    const double cost = model_query_cost(outcome.model, set);
    if (!found || cost < fam.cost) {
      fam.model = std::move(outcome.model);
      fam.init_seed = init_seed;
      fam.epochs = outcome.epochs;
      fam.cost = cost;
      found = true;
    }
  }
  if (!found) {
    throw TrainingError("model " + std::to_string(family_index) + " did not reach zero loss in " +
                        std::to_string(config.max_epochs) + " epochs for any of " +
                        std::to_string(config.restarts) + " restarts (" +
                        std::to_string(set.pairs.size()) + " pairs)");
  }
  return fam;
}

}  // namespace

TrainedEmbedder assemble_embedder(const Graph& g, std::span<const VertexId> vertices,
                                  const EmbedderConfig& config, EmbedderFamily primary,
                                  std::vector<EmbedderFamily> auxiliary) {
  TrainedEmbedder t;
  t.config = config;
  t.config.auxiliary_models = auxiliary.size();
  t.label_domain = g.label_domain_size();
  t.primary = std::move(primary);
  t.auxiliary = std::move(auxiliary);
  for (std::size_t w = 0; w < t.families(); ++w) {
    auto& fam = w == 0 ? t.primary : t.auxiliary[w - 1];
    if (fam.label_map.empty()) fam.label_map = label_permutation(t.label_domain, fam.label_seed);
  }
  t.vertices.assign(vertices.begin(), vertices.end());
  std::sort(t.vertices.begin(), t.vertices.end());
  t.vertices.erase(std::unique(t.vertices.begin(), t.vertices.end()), t.vertices.end());

  const std::size_t d = config.embedding_dim, fams = t.families();
  t.node_rows.assign(t.vertices.size() * fams * d, 1.0);
  for (std::size_t w = 0; w < fams; ++w) {
    const auto& fam = t.family(w);
    std::vector<StarFeatures> stars;
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < t.vertices.size(); ++r) {
      if (g.degree(t.vertices[r]) > config.theta) continue;
      stars.push_back(star_features(extract_unit_star(g, t.vertices[r]), fam.label_map,
                                    t.label_domain));
      rows.push_back(r);
    }
    const auto emb = kernels::embed_all_parallel(fam.model, stars);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy_n(&emb[i * d], d, &t.node_rows[(rows[i] * fams + w) * d]);
    }
  }
  for (VertexId v : t.vertices) {
    const Label l = g.label(v);
    if (t.label_table.count(l)) continue;
    StarFeatures iso{label_feature(t.primary.label_map[l], t.label_domain), {}};
    t.label_table.emplace(l, forward(t.primary.model, iso));
  }
  return t;
}

TrainedEmbedder train_embedder(const Graph& g, std::span<const VertexId> vertices,
                               const EmbedderConfig& config, std::uint64_t seed) {
  validate(config);
  EmbedderFamily primary = train_family(g, vertices, config, seed, 0, 0);
  std::vector<EmbedderFamily> aux;
  for (std::size_t i = 0; i < config.auxiliary_models; ++i) {
    const std::uint64_t label_seed = mix_seed(seed, 0xA0000 + i) | 1;
    aux.push_back(train_family(g, vertices, config, seed, label_seed, i + 1));
  }
  return assemble_embedder(g, vertices, config, std::move(primary), std::move(aux));
}

Embedding node_embedding(const TrainedEmbedder& t, const Graph& g, VertexId v,
                         std::size_t which) {
  const auto row = t.row_of(v);
  if (row >= 0) {
    auto e = t.cached(static_cast<std::size_t>(row), which);
    return Embedding(e.begin(), e.end());
  }
  if (g.degree(v) > t.config.theta) return Embedding(t.config.embedding_dim, 1.0);
  const auto& fam = t.family(which);
  return forward(fam.model, star_features(extract_unit_star(g, v), fam.label_map, t.label_domain));
}

std::optional<Embedding> label_embedding(const TrainedEmbedder& t, Label label) {
  auto it = t.label_table.find(label);
  if (it == t.label_table.end()) return std::nullopt;
  return it->second;
}

Embedding embed_with(const TrainedEmbedder& t, std::size_t which, Label center,
                     std::span<const Label> neighbor_labels) {
  const auto& fam = t.family(which);
  auto feature = [&](Label l) {
    if (l < 1 || l > t.label_domain) throw GraphError("label outside the trained domain");
    return label_feature(fam.label_map[l], t.label_domain);
  };
  StarFeatures f{feature(center), {}};
  for (Label l : neighbor_labels) f.leaves.push_back(feature(l));
  std::sort(f.leaves.begin(), f.leaves.end());
  return forward(fam.model, f);
}

std::size_t audit_certificate(const TrainedEmbedder& t, const Graph& g) {
  std::size_t violations = 0;
  for (std::size_t w = 0; w < t.families(); ++w) {
    const auto& fam = t.family(w);
    const auto set = build_training_set(g, t.vertices, fam.label_map, t.config.theta);
    violations += kernels::test_epoch_serial(fam.model, set).violating_pairs;
  }
  return violations;
}

namespace {

void put_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

double get_double(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw ConfigError("model file: truncated");
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ConfigError("model file: bad number '" + tok + "'");
  }
  return v;
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!(in >> v)) throw ConfigError("model file: truncated");
  return v;
}

void expect(std::istream& in, const std::string& word) {
  std::string tok;
  if (!(in >> tok) || tok != word) {
    throw ConfigError("model file: expected '" + word + "', got '" + tok + "'");
  }
}

void write_family(std::string& out, const char* kind, const EmbedderFamily& f) {
  out += std::string("family ") + kind + " init_seed " + std::to_string(f.init_seed) +
         " label_seed " + std::to_string(f.label_seed) + " epochs " + std::to_string(f.epochs) +
         " cost ";
  put_double(out, f.cost);
  out += "\nparams " + std::to_string(f.model.param_count());
  for (double v : f.model.params()) {
    out += ' ';
    put_double(out, v);
  }
  out += '\n';
}

EmbedderFamily read_family(std::istream& in, const EmbedderConfig& cfg, Label domain) {
  EmbedderFamily f;
  expect(in, "family");
  get<std::string>(in);
  expect(in, "init_seed");
  f.init_seed = get<std::uint64_t>(in);
  expect(in, "label_seed");
  f.label_seed = get<std::uint64_t>(in);
  expect(in, "epochs");
  f.epochs = get<std::size_t>(in);
  expect(in, "cost");
  f.cost = get_double(in);
  expect(in, "params");
  f.model = GnnModel(cfg);
  if (get<std::size_t>(in) != f.model.param_count()) {
    throw ConfigError("model file: parameter count does not match config");
  }
  for (double& v : f.model.params()) v = get_double(in);
  f.label_map = label_permutation(domain, f.label_seed);
  return f;
}

}  // namespace

std::string serialize_embedder(const TrainedEmbedder& t) {
  const auto& c = t.config;
  std::string out = "gnnpe-model 1\n";
  out += "config F " + std::to_string(c.input_dim) + " K " + std::to_string(c.heads) + " Fp " +
         std::to_string(c.hidden_dim) + " d " + std::to_string(c.embedding_dim) + " lr ";
  put_double(out, c.learning_rate);
  out += " batch " + std::to_string(c.batch_size) + " theta " + std::to_string(c.theta) + " b " +
         std::to_string(c.restarts) + " n " + std::to_string(c.auxiliary_models) +
         " max_epochs " + std::to_string(c.max_epochs) + "\n";
  out += "domain " + std::to_string(t.label_domain) + "\n";
  write_family(out, "primary", t.primary);
  for (const auto& f : t.auxiliary) write_family(out, "auxiliary", f);
  out += "vertices " + std::to_string(t.vertices.size()) + "\n";
  const std::size_t row_len = t.families() * c.embedding_dim;
  for (std::size_t r = 0; r < t.vertices.size(); ++r) {
    out += std::to_string(t.vertices[r]);
    for (std::size_t i = 0; i < row_len; ++i) {
      out += ' ';
      put_double(out, t.node_rows[r * row_len + i]);
    }
    out += '\n';
  }
  out += "labels " + std::to_string(t.label_table.size()) + "\n";
  for (const auto& [label, e] : t.label_table) {
    out += std::to_string(label);
    for (double v : e) {
      out += ' ';
      put_double(out, v);
    }
    out += '\n';
  }
  return out;
}

TrainedEmbedder deserialize_embedder(const std::string& text) {
  std::istringstream in(text);
  expect(in, "gnnpe-model");
  if (get<int>(in) != 1) throw ConfigError("model file: unsupported version");
  TrainedEmbedder t;
  auto& c = t.config;
  expect(in, "config");
  expect(in, "F");
  c.input_dim = get<std::size_t>(in);
  expect(in, "K");
  c.heads = get<std::size_t>(in);
  expect(in, "Fp");
  c.hidden_dim = get<std::size_t>(in);
  expect(in, "d");
  c.embedding_dim = get<std::size_t>(in);
  expect(in, "lr");
  c.learning_rate = get_double(in);
  expect(in, "batch");
  c.batch_size = get<std::size_t>(in);
  expect(in, "theta");
  c.theta = get<std::size_t>(in);
  expect(in, "b");
  c.restarts = get<std::size_t>(in);
  expect(in, "n");
  c.auxiliary_models = get<std::size_t>(in);
  expect(in, "max_epochs");
  c.max_epochs = get<std::size_t>(in);
  expect(in, "domain");
  t.label_domain = get<Label>(in);
  t.primary = read_family(in, c, t.label_domain);
  for (std::size_t i = 0; i < c.auxiliary_models; ++i) {
    t.auxiliary.push_back(read_family(in, c, t.label_domain));
  }
  expect(in, "vertices");
  const auto nv = get<std::size_t>(in);
  const std::size_t row_len = t.families() * c.embedding_dim;
  t.vertices.resize(nv);
  t.node_rows.resize(nv * row_len);
  for (std::size_t r = 0; r < nv; ++r) {
    t.vertices[r] = get<VertexId>(in);
    for (std::size_t i = 0; i < row_len; ++i) t.node_rows[r * row_len + i] = get_double(in);
  }
  expect(in, "labels");
  const auto nl = get<std::size_t>(in);
  for (std::size_t i = 0; i < nl; ++i) {
    const auto label = get<Label>(in);
    Embedding e(c.embedding_dim);
    for (double& v : e) v = get_double(in);
    t.label_table.emplace(label, std::move(e));
  }
  return t;
}

}  // namespace gnnpe
