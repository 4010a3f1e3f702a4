#include "malgpro/simulate.hpp"

#include <cmath>

#include "malgpro/errors.hpp"
#include "malgpro/parallel.hpp"
#include "malgpro/random.hpp"

namespace malgpro {

Path simulate_path(const ControlProblem& problem, const PiecewiseControl& control, Matrix increments,
                   std::size_t path_index) {
  const TimeGrid& grid = control.grid();
  const auto steps = static_cast<Eigen::Index>(grid.steps());
  if (increments.cols() != steps || static_cast<std::size_t>(increments.rows()) != problem.noise_dim)
    throw InvalidArgument("simulate: increments must be noise_dim x steps");
  if (control.dim() != problem.control_dim) throw InvalidArgument("simulate: control dimension mismatch");

  Path path;
  path.states.resize(static_cast<Eigen::Index>(problem.state_dim), steps + 1);
  path.states.col(0) = problem.initial_state;
  const double dt = grid.dt();
  for (Eigen::Index j = 0; j < steps; ++j) {
    const auto js = static_cast<std::size_t>(j);
    const Vector x = path.states.col(j);
    const Vector u = control.values().col(j);
    const double t = grid.node(js);
    Vector next = x + problem.drift(x, u, t) * dt + problem.diffusion(x, u, t) * increments.col(j);
    if (!next.allFinite()) throw DivergedPathError(path_index, js);
    path.states.col(j + 1) = next;
  }
  path.increments = std::move(increments);
  return path;
}

Path simulate_path(const ControlProblem& problem, const PiecewiseControl& control, std::uint64_t seed,
                   std::size_t path_index) {
  const Matrix factor = covariance_factor(problem.covariance());
  return simulate_path(problem, control, sample_path_increments(control.grid(), factor, seed, path_index),
                       path_index);
}

PathBundle simulate_forward(const ControlProblem& problem, const PiecewiseControl& control,
                            const std::vector<Matrix>& increments, const TimeGrid& grid, std::uint64_t seed) {
  if (!(control.grid() == grid)) throw InvalidArgument("simulate_forward: control is defined on a different grid");
  PathBundle bundle{grid, seed, {}};
  bundle.paths.reserve(increments.size());
  for (std::size_t p = 0; p < increments.size(); ++p)
    bundle.paths.push_back(simulate_path(problem, control, increments[p], p));
  return bundle;
}

PathBundle simulate_batch(const ControlProblem& problem, const PiecewiseControl& control, std::size_t batch,
                          std::uint64_t seed) {
  const auto inc = sample_wiener(control.grid(), problem.noise_dim, problem.covariance(), batch, seed);
  return simulate_forward(problem, control, inc, control.grid(), seed);
}

double path_cost(const ControlProblem& problem, const Path& path, const PiecewiseControl& control) {
  const TimeGrid& grid = control.grid();
  const auto steps = static_cast<Eigen::Index>(grid.steps());
  if (path.states.cols() != steps + 1) throw InvalidArgument("path_cost: path and control grids differ");
  double running = 0.0;
  for (Eigen::Index j = 0; j < steps; ++j)
    running += problem.running_cost(path.states.col(j), control.values().col(j), grid.node(static_cast<std::size_t>(j)));
  return running * grid.dt() + problem.terminal_cost(path.states.col(steps));
}

Estimate evaluate_cost(const ControlProblem& problem, const PathBundle& paths, const PiecewiseControl& control) {
  if (!(paths.grid == control.grid())) throw InvalidArgument("evaluate_cost: paths and control use different grids");
  Accumulator acc;
  for (const Path& p : paths.paths) acc.add(path_cost(problem, p, control));
  return acc.estimate();
}

Estimate estimate_cost(const ControlProblem& problem, const PiecewiseControl& control, std::size_t batch,
                       std::uint64_t seed) {
  const Matrix factor = covariance_factor(problem.covariance());
  const std::size_t chunks = (batch + kChunkSize - 1) / kChunkSize;
  std::vector<Accumulator> partial(chunks);
  for_each_chunk(batch, [&](std::size_t c, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const Path path =
          simulate_path(problem, control, sample_path_increments(control.grid(), factor, seed, p), p);
      partial[c].add(path_cost(problem, path, control));
    }
  });
  Accumulator total;
  for (const auto& a : partial) total.merge(a);
  return total.estimate();
}

}  // namespace malgpro
