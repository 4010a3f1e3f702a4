#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "malgpro/control.hpp"
#include "malgpro/flow.hpp"
#include "malgpro/gradient.hpp"
#include "malgpro/problem.hpp"

namespace malgpro {

/// Learning rate, linear from `start` at the first iteration to `end` at the last.
struct RateSchedule {
  double start = 1e-2;
  double end = 1e-2;

  static RateSchedule constant(double rate) { return {rate, rate}; }
  double at(std::size_t iteration, std::size_t max_iterations) const;
};

struct SolveOptions {
  TimeGrid grid{1.0, 100};
  std::size_t batch = 100;
  RateSchedule rate;
  std::size_t max_iterations = 500;
  /// Stop once the sup-norm of the projected gradient drops to this value.
  double gradient_tolerance = 1e-4;
  /// Stop once |J_i - J_{i-w}| <= tol |J_{i-w}| over the last `stall_window` iterations.
  double objective_stall_tolerance = 1e-8;
  std::size_t stall_window = 10;
  std::uint64_t master_seed = 0;
  FlowMode flow_mode = FlowMode::factorized;
  /// Iterations with more than this fraction of diverged paths abort the solve.
  double max_diverged_fraction = 0.1;
  /// Starting control; zero projected onto the admissible set when absent.
  std::optional<Eigen::MatrixXd> initial_values;
  /// When set, the control error against it is traced.
  ReferenceControl reference;
};

enum class Termination { max_iterations, gradient_tolerance, objective_stall };

std::string to_string(Termination reason);

struct SolveResult {
  PiecewiseControl control;
  std::vector<Estimate> objective;     // J at the iterate the gradient was taken at
  std::vector<double> gradient_norm;   // sup-norm of the projected gradient
  std::vector<double> control_error;   // E_c after the update; empty without reference
  std::vector<double> wall_ms;
  std::size_t iterations = 0;
  Termination termination = Termination::max_iterations;

  double mean_wall_ms() const;
};

/// Euclidean projection of a k x N array onto U_N.
PiecewiseControl project(const Matrix& candidate, const TimeGrid& grid, const AdmissibleSet& set);

/// P(u - rate * gradient) when minimizing, P(u + rate * gradient) when maximizing.
/// Throws PoisonedGradientError on non-finite entries.
PiecewiseControl step(const PiecewiseControl& control, const Matrix& gradient, double rate, Sense sense);

/// Gradient of J at `control` using the substream seed of one iteration.
using GradientOracle = std::function<GradientEstimate(const PiecewiseControl& control, std::uint64_t seed)>;

/// Projected gradient iteration shared by Mal-GPro and the adjoint baseline.
/// Iteration i draws fresh paths from substream i of the master seed.
SolveResult projected_gradient_solve(const ControlProblem& problem, const SolveOptions& options,
                                     const GradientOracle& oracle);

/// Mal-GPro: forward simulation, Malliavin flows, Gateaux gradient, projected step.
SolveResult solve(const ControlProblem& problem, const SolveOptions& options);

struct Residual {
  double value = 0.0;      // max_j ||g_j||
  double std_error = 0.0;  // ||se_j|| at the maximizing node
  std::size_t node = 0;
  GradientEstimate gradient;
};

/// Sup-norm of the estimated gradient; zero at a critical deterministic control.
Residual optimality_residual(const ControlProblem& problem, const PiecewiseControl& control, std::size_t batch,
                             std::uint64_t seed, FlowMode mode = FlowMode::factorized);

}  // namespace malgpro
