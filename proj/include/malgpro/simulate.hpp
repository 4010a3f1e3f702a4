#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "malgpro/problem.hpp"
#include "malgpro/stats.hpp"
#include "malgpro/time_grid.hpp"

namespace malgpro {

/// One Euler-Maruyama trajectory with the noise that drove it.
struct Path {
  Matrix states;      // n x (N+1), column j is x_{t_j}
  Matrix increments;  // d x N, column j is the increment over [t_j, t_{j+1})
};

struct PathBundle {
  TimeGrid grid;
  std::uint64_t seed = 0;
  std::vector<Path> paths;
};

/// x_{j+1} = x_j + a(x_j,u_j,t_j) dt + B(x_j,u_j,t_j) dw_j.
/// Throws DivergedPathError(path_index, step) on a non-finite state.
Path simulate_path(const ControlProblem& problem, const PiecewiseControl& control, Matrix increments,
                   std::size_t path_index = 0);

/// Substream `path_index` of `seed`, sampled then simulated.
Path simulate_path(const ControlProblem& problem, const PiecewiseControl& control, std::uint64_t seed,
                   std::size_t path_index);

PathBundle simulate_forward(const ControlProblem& problem, const PiecewiseControl& control,
                            const std::vector<Matrix>& increments, const TimeGrid& grid, std::uint64_t seed = 0);

/// sample_wiener followed by simulate_forward.
PathBundle simulate_batch(const ControlProblem& problem, const PiecewiseControl& control, std::size_t batch,
                          std::uint64_t seed);

/// sum_{j<N} L(x_j,u_j,t_j) dt + h(x_N) along one path.
double path_cost(const ControlProblem& problem, const Path& path, const PiecewiseControl& control);

/// Batch mean of path_cost and its standard error.
Estimate evaluate_cost(const ControlProblem& problem, const PathBundle& paths, const PiecewiseControl& control);

/// Streaming cost estimate over `batch` substreams of `seed`; no paths stored.
Estimate estimate_cost(const ControlProblem& problem, const PiecewiseControl& control, std::size_t batch,
                       std::uint64_t seed);

}  // namespace malgpro
