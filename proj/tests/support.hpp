#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "malgpro/problem.hpp"
#include "malgpro/simulate.hpp"
#include "malgpro/stats.hpp"

namespace testing {

using malgpro::Matrix;
using malgpro::Vector;

inline Vector vec1(double v) { return Vector::Constant(1, v); }
inline Matrix mat1(double v) { return Matrix::Constant(1, 1, v); }

/// dx = mu x dt + sigma x dw, L = 0, h = x. Analytical derivatives.
inline malgpro::ControlProblem gbm(double mu, double sigma, double x0 = 1.0) {
  malgpro::ControlProblem p;
  p.name = "gbm";
  p.initial_state = vec1(x0);
  p.drift = [mu](const Vector& x, const Vector&, double) { return vec1(mu * x(0)); };
  p.diffusion = [sigma](const Vector& x, const Vector&, double) { return mat1(sigma * x(0)); };
  p.running_cost = [](const Vector&, const Vector&, double) { return 0.0; };
  p.terminal_cost = [](const Vector& x) { return x(0); };
  p.drift_jac_x = [mu](const Vector&, const Vector&, double) { return mat1(mu); };
  p.drift_jac_u = [](const Vector&, const Vector&, double) { return mat1(0.0); };
  p.diffusion_jac_x = [sigma](const Vector&, const Vector&, double) { return std::vector<Matrix>{mat1(sigma)}; };
  p.diffusion_jac_u = [](const Vector&, const Vector&, double) { return std::vector<Matrix>{mat1(0.0)}; };
  p.cost_grad_x = [](const Vector&, const Vector&, double) { return vec1(0.0); };
  p.cost_grad_u = [](const Vector&, const Vector&, double) { return vec1(0.0); };
  p.cost_hess_xx = [](const Vector&, const Vector&, double) { return mat1(0.0); };
  p.cost_hess_ux = [](const Vector&, const Vector&, double) { return mat1(0.0); };
  p.terminal_grad = [](const Vector&) { return vec1(1.0); };
  p.terminal_hess = [](const Vector&) { return mat1(0.0); };
  return p;
}

/// dx = (A x + B u) dt + S dw with constant matrices; quadratic cost
/// L = 1/2 x^T x + 1/2 u^T u, h = 1/2 |x|^2. Every derivative analytical.
inline malgpro::ControlProblem linear_additive(const Matrix& a, const Matrix& b, const Matrix& s, const Vector& x0) {
  malgpro::ControlProblem p;
  const auto n = a.rows(), k = b.cols(), d = s.cols();
  p.name = "linear";
  p.state_dim = static_cast<std::size_t>(n);
  p.control_dim = static_cast<std::size_t>(k);
  p.noise_dim = static_cast<std::size_t>(d);
  p.initial_state = x0;
  p.drift = [a, b](const Vector& x, const Vector& u, double) -> Vector { return a * x + b * u; };
  p.diffusion = [s](const Vector&, const Vector&, double) { return s; };
  p.running_cost = [](const Vector& x, const Vector& u, double) { return 0.5 * x.squaredNorm() + 0.5 * u.squaredNorm(); };
  p.terminal_cost = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  p.drift_jac_x = [a](const Vector&, const Vector&, double) { return a; };
  p.drift_jac_u = [b](const Vector&, const Vector&, double) { return b; };
  p.diffusion_jac_x = [n, d](const Vector&, const Vector&, double) {
    return std::vector<Matrix>(static_cast<std::size_t>(d), Matrix::Zero(n, n));
  };
  p.diffusion_jac_u = [n, k, d](const Vector&, const Vector&, double) {
    return std::vector<Matrix>(static_cast<std::size_t>(d), Matrix::Zero(n, k));
  };
  p.cost_grad_x = [](const Vector& x, const Vector&, double) -> Vector { return x; };
  p.cost_grad_u = [](const Vector&, const Vector& u, double) -> Vector { return u; };
  p.cost_hess_xx = [n](const Vector&, const Vector&, double) -> Matrix { return Matrix::Identity(n, n); };
  p.cost_hess_ux = [n, k](const Vector&, const Vector&, double) -> Matrix { return Matrix::Zero(k, n); };
  p.terminal_grad = [](const Vector& x) -> Vector { return x; };
  p.terminal_hess = [n](const Vector&) -> Matrix { return Matrix::Identity(n, n); };
  return p;
}

/// Common-random-number central difference of J in the direction of one
/// control entry, scaled by 1/dt so it estimates the node-wise gradient.
inline malgpro::Estimate fd_gradient(const malgpro::ControlProblem& problem, const malgpro::PiecewiseControl& u,
                                     Eigen::Index coord, Eigen::Index node, double eps, std::size_t batch,
                                     std::uint64_t seed) {
  Matrix up = u.values(), down = u.values();
  up(coord, node) += eps;
  down(coord, node) -= eps;
  // Bypass projection: the oracle differentiates J itself.
  const malgpro::PiecewiseControl cu(u.grid(), up), cd(u.grid(), down);
  malgpro::Accumulator acc;
  for (std::size_t p = 0; p < batch; ++p) {
    const auto pu = malgpro::simulate_path(problem, cu, seed, p);
    const auto pd = malgpro::simulate_path(problem, cd, seed, p);
    acc.add((malgpro::path_cost(problem, pu, cu) - malgpro::path_cost(problem, pd, cd)) /
            (2.0 * eps * u.grid().dt()));
  }
  return acc.estimate();
}

/// |a - b| <= max(rel |b|, sigmas * sqrt(se_a^2 + se_b^2)).
inline bool agrees(double a, double se_a, double b, double se_b, double rel = 0.05, double sigmas = 3.0) {
  return std::abs(a - b) <= std::max(rel * std::abs(b), sigmas * std::hypot(se_a, se_b));
}

}  // namespace testing
