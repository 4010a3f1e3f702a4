#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "malgpro/flow.hpp"
#include "malgpro/problem.hpp"
#include "malgpro/simulate.hpp"
#include "malgpro/stats.hpp"

namespace malgpro {

/// Batch estimate of the node-wise gradient dJ/du(t_j), j = 0..N-1.
struct GradientEstimate {
  Matrix mean;       // k x N
  Matrix std_error;  // k x N
  Estimate cost;     // J on the same paths
  std::size_t paths_used = 0;
  std::size_t paths_diverged = 0;

  /// max_j ||mean(:, j)||.
  double sup_norm() const;
};

/// Per-path gradient sample, k x N.
using GradientSampler = std::function<Matrix(const Path& path)>;

/// Simulates `batch` substreams of `seed` under `control`, applies `sampler` to each
/// path and reduces in path order. Diverged paths are counted and skipped.
GradientEstimate estimate_gradient(const ControlProblem& problem, const PiecewiseControl& control,
                                   std::size_t batch, std::uint64_t seed, const GradientSampler& sampler);

/// Per-path Malliavin gradient of the scalar problem (n = k = d = 1), 1 x N.
/// Every D_s x_t / b(s) is the flow ratio eta_t / eta_s from scalar_log_flow.
Matrix scalar_gradient_sample(const Path& path, const ControlProblem& problem, const PiecewiseControl& control);

/// Per-path Malliavin gradient of a vector problem, k x N. Factorized mode uses
/// backward partial sums of grad_x L^T Y_t and Y_t^T hess_x L Y_t, so it costs
/// O(N n^3); dense mode sums over every (s, t) pair.
Matrix vector_gradient_sample(const Path& path, const ControlProblem& problem, const PiecewiseControl& control,
                              FlowMode mode = FlowMode::factorized);

GradientEstimate gateaux_gradient_scalar(const ControlProblem& problem, const PiecewiseControl& control,
                                         std::size_t batch, std::uint64_t seed);

GradientEstimate gateaux_gradient_vector(const ControlProblem& problem, const PiecewiseControl& control,
                                         std::size_t batch, std::uint64_t seed,
                                         FlowMode mode = FlowMode::factorized);

/// Scalar route when n = k = d = 1, vector route otherwise.
GradientEstimate gateaux_gradient(const ControlProblem& problem, const PiecewiseControl& control, std::size_t batch,
                                  std::uint64_t seed, FlowMode mode = FlowMode::factorized);

}  // namespace malgpro
