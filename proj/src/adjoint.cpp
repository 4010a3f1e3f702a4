#include "malgpro/adjoint.hpp"

#include "malgpro/errors.hpp"

namespace malgpro {

namespace {

void check_adjoint_shapes(const Vector& y, const Matrix& z, const ControlProblem& problem) {
  if (static_cast<std::size_t>(y.size()) != problem.state_dim)
    throw InvalidArgument("hamiltonian: adjoint state has wrong dimension");
  if (static_cast<std::size_t>(z.rows()) != problem.noise_dim ||
      static_cast<std::size_t>(z.cols()) != problem.state_dim)
    throw InvalidArgument("hamiltonian: z must be d x n");
}

}  // namespace

double hamiltonian(const Vector& x, const Vector& y, const Vector& u, const Matrix& z, double t,
                   const ControlProblem& problem) {
  check_adjoint_shapes(y, z, problem);
  const Matrix b = problem.diffusion(x, u, t);
  // sum_i b_i^T z^i = trace(z B)
  return problem.running_cost(x, u, t) + problem.drift(x, u, t).dot(y) + (z * b).trace();
}

HamiltonianGradient hamiltonian_grad(const Vector& x, const Vector& y, const Vector& u, const Matrix& z, double t,
                                     const ControlProblem& problem) {
  check_adjoint_shapes(y, z, problem);
  const Derivatives deriv(problem);
  HamiltonianGradient g{deriv.cost_x(x, u, t) + deriv.drift_x(x, u, t).transpose() * y,
                        deriv.cost_u(x, u, t) + deriv.drift_u(x, u, t).transpose() * y};
  const auto jbx = deriv.diffusion_x(x, u, t);
  const auto jbu = deriv.diffusion_u(x, u, t);
  for (std::size_t i = 0; i < problem.noise_dim; ++i) {
    const Vector zi = z.row(static_cast<Eigen::Index>(i)).transpose();
    g.x += jbx[i].transpose() * zi;
    g.u += jbu[i].transpose() * zi;
  }
  return g;
}

AdjointPath adsgd_backward(const Path& path, const ControlProblem& problem, const PiecewiseControl& control) {
  const TimeGrid& grid = control.grid();
  const std::size_t steps = grid.steps();
  const auto n = static_cast<Eigen::Index>(problem.state_dim);
  const auto d = static_cast<Eigen::Index>(problem.noise_dim);
  if (path.states.cols() != static_cast<Eigen::Index>(steps + 1))
    throw InvalidArgument("adsgd_backward: path and control grids differ");
  const double dt = grid.dt();
  const Derivatives deriv(problem);

  AdjointPath adj;
  adj.y.resize(n, static_cast<Eigen::Index>(steps + 1));
  adj.z.assign(steps + 1, Matrix::Zero(d, n));
  adj.y.col(static_cast<Eigen::Index>(steps)) = deriv.terminal_x(path.states.col(static_cast<Eigen::Index>(steps)));
  for (std::size_t jj = steps; jj-- > 0;) {
    const auto j = static_cast<Eigen::Index>(jj);
    const Vector y_next = adj.y.col(j + 1);
    Matrix& z = adj.z[jj];
    for (Eigen::Index i = 0; i < d; ++i) z.row(i) = y_next.transpose() * (path.increments(i, j) / dt);
    const Vector x = path.states.col(j);
    const auto hx = hamiltonian_grad(x, y_next, control.values().col(j), z, grid.node(jj), problem).x;
    adj.y.col(j) = y_next + hx * dt;
  }
  return adj;
}

Matrix adsgd_gradient_sample(const Path& path, const ControlProblem& problem, const PiecewiseControl& control) {
  const AdjointPath adj = adsgd_backward(path, problem, control);
  const TimeGrid& grid = control.grid();
  const std::size_t steps = grid.steps();
  Matrix g(static_cast<Eigen::Index>(problem.control_dim), static_cast<Eigen::Index>(steps));
  for (std::size_t jj = 0; jj < steps; ++jj) {
    const auto j = static_cast<Eigen::Index>(jj);
    g.col(j) = hamiltonian_grad(path.states.col(j), adj.y.col(j), control.values().col(j), adj.z[jj],
                                grid.node(jj), problem)
                   .u;
  }
  return g;
}

GradientEstimate adsgd_gradient(const ControlProblem& problem, const PiecewiseControl& control, std::size_t batch,
                                std::uint64_t seed) {
  return estimate_gradient(problem, control, batch, seed,
                           [&](const Path& p) { return adsgd_gradient_sample(p, problem, control); });
}

SolveResult adsgd_solve(const ControlProblem& problem, const SolveOptions& options) {
  const std::size_t batch = options.batch;
  return projected_gradient_solve(problem, options, [&](const PiecewiseControl& u, std::uint64_t seed) {
    return adsgd_gradient(problem, u, batch, seed);
  });
}

}  // namespace malgpro
