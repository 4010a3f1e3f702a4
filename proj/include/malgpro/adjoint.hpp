#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "malgpro/gradient.hpp"
#include "malgpro/problem.hpp"
#include "malgpro/simulate.hpp"
#include "malgpro/solver.hpp"

namespace malgpro {

/// Single-sample adjoint pair along one forward path.
struct AdjointPath {
  Matrix y;               // n x (N+1); y(:, N) = grad h(x_N)
  std::vector<Matrix> z;  // N+1 entries of d x n, row i is z^i; z[N] = 0
};

/// H = L + a^T y + sum_i b_i^T z^i, with z^i the rows of `z` (d x n).
double hamiltonian(const Vector& x, const Vector& y, const Vector& u, const Matrix& z, double t,
                   const ControlProblem& problem);

struct HamiltonianGradient {
  Vector x;  // grad_x L + (J_x a)^T y + sum_i (J_x b_i)^T z^i
  Vector u;  // grad_u L + (J_u a)^T y + sum_i (J_u b_i)^T z^i
};

HamiltonianGradient hamiltonian_grad(const Vector& x, const Vector& y, const Vector& u, const Matrix& z, double t,
                                     const ControlProblem& problem);

/// Backward sweep: z_j^i = y_{j+1} dw_j^i / dt, y_j = y_{j+1} + H_x(x_j, y_{j+1}, u_j, z_j) dt.
AdjointPath adsgd_backward(const Path& path, const ControlProblem& problem, const PiecewiseControl& control);

/// H_u(x_j, y_j, u_j, z_j, t_j) along one path, k x N.
Matrix adsgd_gradient_sample(const Path& path, const ControlProblem& problem, const PiecewiseControl& control);

GradientEstimate adsgd_gradient(const ControlProblem& problem, const PiecewiseControl& control, std::size_t batch,
                                std::uint64_t seed);

/// Ad-SGD: the projected gradient loop driven by the batch-mean of H_u.
SolveResult adsgd_solve(const ControlProblem& problem, const SolveOptions& options);

}  // namespace malgpro
