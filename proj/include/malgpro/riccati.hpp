#pragma once

#include <vector>

#include "malgpro/problem.hpp"
#include "malgpro/time_grid.hpp"

namespace malgpro {

/// Open-loop optimum of the deterministic LQ problem on a grid.
struct RiccatiSolution {
  std::vector<Matrix> p;     // N+1 symmetric matrices, p[N] = 0
  Matrix mean_path;          // n x (N+1)
  Matrix open_loop_control;  // k x N, -R^{-1} B^T P_j m_j
};

/// Integrates -dP/dt = A^T P + P A - P B R^{-1} B^T P + Q backward from P_T = 0 with
/// classical RK4 (on a half-step lattice so the forward mean dynamics
/// dm/dt = (A - B R^{-1} B^T P) m can use RK4 too). Throws InvalidArgument if R is
/// not positive definite.
RiccatiSolution riccati_oracle(const Matrix& a, const Matrix& b, const Matrix& q_cost, const Matrix& r_cost,
                               const Vector& x0, const TimeGrid& grid);

}  // namespace malgpro
