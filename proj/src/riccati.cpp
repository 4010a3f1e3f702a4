#include "malgpro/riccati.hpp"

#include <Eigen/Cholesky>

#include "malgpro/errors.hpp"

namespace malgpro {

RiccatiSolution riccati_oracle(const Matrix& a, const Matrix& b, const Matrix& q_cost, const Matrix& r_cost,
                               const Vector& x0, const TimeGrid& grid) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || q_cost.rows() != n || q_cost.cols() != n || x0.size() != n ||
      r_cost.rows() != b.cols() || r_cost.cols() != b.cols())
    throw InvalidArgument("riccati_oracle: inconsistent matrix dimensions");
  if (!r_cost.isApprox(r_cost.transpose()))
    throw InvalidArgument("riccati_oracle: control weight R is not symmetric");
  const Eigen::LLT<Matrix> llt(r_cost);
  if (llt.info() != Eigen::Success) throw InvalidArgument("riccati_oracle: control weight R is not positive definite");

  const Matrix r_inv_bt = llt.solve(b.transpose());  // R^{-1} B^T
  const Matrix s = b * r_inv_bt;
  // Backward time tau = T - t: dP/dtau = A^T P + P A - P S P + Q.
  auto rhs = [&](const Matrix& p) -> Matrix { return a.transpose() * p + p * a - p * s * p + q_cost; };

  const std::size_t steps = grid.steps();
  const std::size_t half_steps = 2 * steps;
  const double h = grid.dt() / 2.0;
  std::vector<Matrix> half(half_steps + 1);
  half[half_steps] = Matrix::Zero(n, n);
  for (std::size_t i = half_steps; i-- > 0;) {
    const Matrix& p = half[i + 1];
    const Matrix k1 = rhs(p);
    const Matrix k2 = rhs(p + 0.5 * h * k1);
    const Matrix k3 = rhs(p + 0.5 * h * k2);
    const Matrix k4 = rhs(p + h * k3);
    const Matrix next = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    half[i] = 0.5 * (next + next.transpose());
  }

  RiccatiSolution sol;
  sol.p.resize(steps + 1);
  for (std::size_t j = 0; j <= steps; ++j) sol.p[j] = half[2 * j];

  auto closed = [&](std::size_t half_index, const Vector& m) -> Vector {
    return (a - s * half[half_index]) * m;
  };
  const double dt = grid.dt();
  sol.mean_path.resize(n, static_cast<Eigen::Index>(steps + 1));
  sol.mean_path.col(0) = x0;
  for (std::size_t j = 0; j < steps; ++j) {
    const Vector m = sol.mean_path.col(static_cast<Eigen::Index>(j));
    const Vector k1 = closed(2 * j, m);
    const Vector k2 = closed(2 * j + 1, m + 0.5 * dt * k1);
    const Vector k3 = closed(2 * j + 1, m + 0.5 * dt * k2);
    const Vector k4 = closed(2 * j + 2, m + dt * k3);
    sol.mean_path.col(static_cast<Eigen::Index>(j + 1)) = m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  sol.open_loop_control.resize(b.cols(), static_cast<Eigen::Index>(steps));
  for (std::size_t j = 0; j < steps; ++j)
    sol.open_loop_control.col(static_cast<Eigen::Index>(j)) =
        -r_inv_bt * sol.p[j] * sol.mean_path.col(static_cast<Eigen::Index>(j));
  return sol;
}

}  // namespace malgpro
