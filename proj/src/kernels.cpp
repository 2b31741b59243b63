#include "gnnpe/kernels.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gnnpe::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

double batch_gradient_serial(const GnnModel& model, const TrainingSet& set,
                             std::span<const TrainingSet::Pair> batch, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> local(grad.size());
  double loss = 0.0;
  for (const auto& pr : batch) {
    std::fill(local.begin(), local.end(), 0.0);
    const double l =
        pair_loss_gradient(model, set.parents[pr.parent], set.children[pr.child], local);
    loss += l;
    if (l > 0.0) {
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += local[i];
    }
  }
  return loss;
}

double batch_gradient_parallel(const GnnModel& model, const TrainingSet& set,
                               std::span<const TrainingSet::Pair> batch, std::span<double> grad) {
  // One gradient slot per pair, reduced in pair order: the summation order
  // then matches the serial kernel exactly.
  const std::size_t P = grad.size();
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
  std::vector<double> slots(batch.size() * P, 0.0);
  std::vector<double> losses(batch.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& pr = batch[static_cast<std::size_t>(i)];
    losses[static_cast<std::size_t>(i)] = pair_loss_gradient(
        model, set.parents[pr.parent], set.children[pr.child],
        std::span<double>(slots).subspan(static_cast<std::size_t>(i) * P, P));
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    loss += losses[i];
    if (losses[i] > 0.0) {
      const double* s = &slots[i * P];
      for (std::size_t j = 0; j < P; ++j) grad[j] += s[j];
    }
  }
  return loss;
}

std::vector<double> embed_all_serial(const GnnModel& model, std::span<const StarFeatures> stars) {
  const std::size_t d = model.embedding_dim();
  std::vector<double> out(stars.size() * d);
  ForwardCache cache;
  for (std::size_t i = 0; i < stars.size(); ++i) {
    forward(model, stars[i], cache);
    std::copy(cache.out.begin(), cache.out.end(), out.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return out;
}

std::vector<double> embed_all_parallel(const GnnModel& model,
                                       std::span<const StarFeatures> stars) {
  const std::size_t d = model.embedding_dim();
  std::vector<double> out(stars.size() * d);
  const auto n = static_cast<std::ptrdiff_t>(stars.size());
#pragma omp parallel
  {
    ForwardCache cache;
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      forward(model, stars[static_cast<std::size_t>(i)], cache);
      std::copy(cache.out.begin(), cache.out.end(), out.begin() + i * static_cast<std::ptrdiff_t>(d));
    }
  }
  return out;
}

namespace {

TestEpoch check_pairs(const TrainingSet& set, const std::vector<double>& parents,
                      const std::vector<double>& children, std::size_t d) {
  TestEpoch t;
  for (const auto& pr : set.pairs) {
    const double* g = &parents[pr.parent * d];
    const double* s = &children[pr.child * d];
    bool violated = false;
    for (std::size_t k = 0; k < d; ++k) {
      if (s[k] > g[k]) {
        violated = true;
        const double r = s[k] - g[k];
        t.loss += r * r;
      }
    }
    if (violated) ++t.violating_pairs;
  }
  return t;
}

}  // namespace

TestEpoch test_epoch_serial(const GnnModel& model, const TrainingSet& set) {
  return check_pairs(set, embed_all_serial(model, set.parents),
                     embed_all_serial(model, set.children), model.embedding_dim());
}

TestEpoch test_epoch_parallel(const GnnModel& model, const TrainingSet& set) {
  return check_pairs(set, embed_all_parallel(model, set.parents),
                     embed_all_parallel(model, set.children), model.embedding_dim());
}

namespace {

inline bool dominated_by(const double* q, const double* x, std::size_t dim) {
  for (std::size_t k = 0; k < dim; ++k) {
    if (q[k] > x[k]) return false;
  }
  return true;
}

}  // namespace

std::uint64_t weighted_dominance_count_serial(std::span<const double> queries,
                                              std::span<const std::uint64_t> weights,
                                              std::span<const double> data, std::size_t dim) {
  const std::size_t nq = queries.size() / dim, nd = data.size() / dim;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < nq; ++i) {
    if (weights[i] == 0) continue;
    std::uint64_t c = 0;
    for (std::size_t j = 0; j < nd; ++j) c += dominated_by(&queries[i * dim], &data[j * dim], dim);
    total += c * weights[i];
  }
  return total;
}

std::uint64_t weighted_dominance_count_parallel(std::span<const double> queries,
                                                std::span<const std::uint64_t> weights,
                                                std::span<const double> data, std::size_t dim) {
  const auto nq = static_cast<std::ptrdiff_t>(queries.size() / dim);
  const std::size_t nd = data.size() / dim;
  std::uint64_t total = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : total)
  for (std::ptrdiff_t i = 0; i < nq; ++i) {
    const auto qi = static_cast<std::size_t>(i);
    if (weights[qi] == 0) continue;
    std::uint64_t c = 0;
    for (std::size_t j = 0; j < nd; ++j) c += dominated_by(&queries[qi * dim], &data[j * dim], dim);
    total += c * weights[qi];
  }
  return total;
}

}  // namespace gnnpe::kernels
