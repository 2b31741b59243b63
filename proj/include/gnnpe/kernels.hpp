#pragma once

// Data-parallel training kernels. Every `parallel` entry point is an OpenMP
// version of its `serial` counterpart and must produce bitwise identical
// results for any thread count; the serial versions are the references the
// tests and the benchmark compare against.

#include <cstdint>
#include <span>
#include <vector>

#include "gnnpe/gnn.hpp"

namespace gnnpe::kernels {

/// Loss of the batch; the summed gradient is written (not added) to `grad`.
double batch_gradient_serial(const GnnModel& model, const TrainingSet& set,
                             std::span<const TrainingSet::Pair> batch, std::span<double> grad);
double batch_gradient_parallel(const GnnModel& model, const TrainingSet& set,
                               std::span<const TrainingSet::Pair> batch, std::span<double> grad);

/// Row-major (stars.size() × d) forward outputs.
std::vector<double> embed_all_serial(const GnnModel& model, std::span<const StarFeatures> stars);
std::vector<double> embed_all_parallel(const GnnModel& model,
                                       std::span<const StarFeatures> stars);

/// Full-dataset test pass with exact component-wise comparisons.
TestEpoch test_epoch_serial(const GnnModel& model, const TrainingSet& set);
TestEpoch test_epoch_parallel(const GnnModel& model, const TrainingSet& set);

/// For every query row, the number of data rows it dominates, summed with
/// per-query multiplicities `weights`.
std::uint64_t weighted_dominance_count_serial(std::span<const double> queries,
                                              std::span<const std::uint64_t> weights,
                                              std::span<const double> data, std::size_t dim);
std::uint64_t weighted_dominance_count_parallel(std::span<const double> queries,
                                                std::span<const std::uint64_t> weights,
                                                std::span<const double> data, std::size_t dim);

/// Number of OpenMP threads a parallel region would use (1 without OpenMP).
int max_threads();
void set_threads(int threads);

}  // namespace gnnpe::kernels
