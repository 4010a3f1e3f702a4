#include "malgpro/solver.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "malgpro/errors.hpp"
#include "malgpro/random.hpp"

namespace malgpro {

namespace {

double column_sup_norm(const Matrix& m) { return m.size() == 0 ? 0.0 : m.colwise().norm().maxCoeff(); }

double direction(Sense sense) { return sense == Sense::minimize ? -1.0 : 1.0; }

}  // namespace

double RateSchedule::at(std::size_t iteration, std::size_t max_iterations) const {
  if (max_iterations <= 1) return start;
  const double f = static_cast<double>(std::min(iteration, max_iterations - 1)) /
                   static_cast<double>(max_iterations - 1);
  return start + (end - start) * f;
}

std::string to_string(Termination reason) {
  switch (reason) {
    case Termination::max_iterations: return "max-iterations";
    case Termination::gradient_tolerance: return "gradient-tolerance";
    case Termination::objective_stall: return "objective-stall";
  }
  return "unknown";
}

double SolveResult::mean_wall_ms() const {
  if (wall_ms.empty()) return 0.0;
  return std::accumulate(wall_ms.begin(), wall_ms.end(), 0.0) / static_cast<double>(wall_ms.size());
}

PiecewiseControl project(const Matrix& candidate, const TimeGrid& grid, const AdmissibleSet& set) {
  return PiecewiseControl(grid, candidate, set);
}

PiecewiseControl step(const PiecewiseControl& control, const Matrix& gradient, double rate, Sense sense) {
  if (gradient.rows() != control.values().rows() || gradient.cols() != control.values().cols())
    throw InvalidArgument("step: gradient shape does not match the control");
  if (!gradient.allFinite()) throw PoisonedGradientError("step: gradient has non-finite entries");
  return project(control.values() + direction(sense) * rate * gradient, control.grid(), control.admissible_set());
}

SolveResult projected_gradient_solve(const ControlProblem& problem, const SolveOptions& options,
                                     const GradientOracle& oracle) {
  validate(problem);
  if (options.batch == 0) throw InvalidArgument("solve: batch must be positive");
  if (std::abs(options.grid.horizon() - problem.horizon) > 1e-12 * problem.horizon)
    throw InvalidArgument("solve: grid horizon differs from the problem horizon");

  PiecewiseControl control = options.initial_values
                                 ? PiecewiseControl(options.grid, *options.initial_values, problem.admissible)
                                 : PiecewiseControl(options.grid, problem.control_dim, problem.admissible);
  if (control.dim() != problem.control_dim) throw InvalidArgument("solve: initial control has wrong dimension");

  SolveResult result{control, {}, {}, {}, {}, 0, Termination::max_iterations};
  const double sign = direction(problem.sense);
  for (std::size_t i = 0; i < options.max_iterations; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const GradientEstimate g = oracle(control, substream_seed(options.master_seed, i));
    if (static_cast<double>(g.paths_diverged) > options.max_diverged_fraction * static_cast<double>(options.batch))
      throw UnstableProblemError("iteration " + std::to_string(i) + ": " + std::to_string(g.paths_diverged) +
                                 " of " + std::to_string(options.batch) +
                                 " paths diverged; reduce the learning rate or the time step");
    const double rate = options.rate.at(i, options.max_iterations);
    if (!(rate > 0.0)) throw InvalidArgument("solve: learning rate must be positive");
    if (!g.mean.allFinite()) throw PoisonedGradientError("iteration " + std::to_string(i) + ": non-finite gradient");

    // Projected gradient (u - P(u -/+ rate g)) / rate; equals g away from active bounds.
    const Matrix candidate = control.values() + sign * rate * g.mean;
    const PiecewiseControl next = project(candidate, control.grid(), control.admissible_set());
    const double pg_norm = column_sup_norm((control.values() - next.values()) / rate);

    result.objective.push_back(g.cost);
    result.gradient_norm.push_back(pg_norm);
    result.iterations = i + 1;

    if (pg_norm <= options.gradient_tolerance) {
      result.termination = Termination::gradient_tolerance;
    } else {
      control = next;
    }
    if (options.reference) result.control_error.push_back(control_error(control, options.reference));
    result.wall_ms.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    if (result.termination == Termination::gradient_tolerance) break;

    const std::size_t w = options.stall_window;
    if (w > 0 && i >= w) {
      const double now = result.objective[i].mean;
      const double then = result.objective[i - w].mean;
      if (std::abs(now - then) <= options.objective_stall_tolerance * std::abs(then)) {
        result.termination = Termination::objective_stall;
        break;
      }
    }
  }
  result.control = control;
  return result;
}

SolveResult solve(const ControlProblem& problem, const SolveOptions& options) {
  const std::size_t batch = options.batch;
  const FlowMode mode = options.flow_mode;
  return projected_gradient_solve(problem, options, [&](const PiecewiseControl& u, std::uint64_t seed) {
    return gateaux_gradient(problem, u, batch, seed, mode);
  });
}

Residual optimality_residual(const ControlProblem& problem, const PiecewiseControl& control, std::size_t batch,
                             std::uint64_t seed, FlowMode mode) {
  Residual r;
  r.gradient = gateaux_gradient(problem, control, batch, seed, mode);
  const Eigen::VectorXd norms = r.gradient.mean.colwise().norm().transpose();
  Eigen::Index node = 0;
  r.value = norms.size() ? norms.maxCoeff(&node) : 0.0;
  r.node = static_cast<std::size_t>(node);
  if (norms.size()) r.std_error = r.gradient.std_error.col(node).norm();
  return r;
}

}  // namespace malgpro
