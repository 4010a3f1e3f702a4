#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "malgpro/control.hpp"

namespace malgpro {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Sense { minimize, maximize };

using VectorField = std::function<Vector(const Vector& x, const Vector& u, double t)>;
using MatrixField = std::function<Matrix(const Vector& x, const Vector& u, double t)>;
using MatrixListField = std::function<std::vector<Matrix>(const Vector& x, const Vector& u, double t)>;
using ScalarField = std::function<double(const Vector& x, const Vector& u, double t)>;

/// One stochastic optimal control problem
///   dx = a(x,u,t) dt + sum_l b_l(x,u,t) dw^l,   J = E[ int L dt + h(x_T) ].
///
/// `drift`, `diffusion`, `running_cost` and `terminal_cost` are required.
/// Derivative callbacks are optional; when one is absent, Derivatives falls back to
/// central differences if `finite_difference_fallback` is set and raises
/// ConfigurationError otherwise.
struct ControlProblem {
  std::string name;
  std::size_t state_dim = 1;
  std::size_t control_dim = 1;
  std::size_t noise_dim = 1;
  double horizon = 1.0;
  Vector initial_state;
  Sense sense = Sense::minimize;

  VectorField drift;
  MatrixField diffusion;  // n x d, column l is b_l
  ScalarField running_cost;
  std::function<double(const Vector& x)> terminal_cost;

  MatrixField drift_jac_x;          // n x n
  MatrixField drift_jac_u;          // n x k
  MatrixListField diffusion_jac_x;  // d entries, n x n
  MatrixListField diffusion_jac_u;  // d entries, n x k
  VectorField cost_grad_x;          // n
  VectorField cost_grad_u;          // k
  MatrixField cost_hess_xx;         // n x n
  MatrixField cost_hess_ux;         // k x n
  std::function<Vector(const Vector& x)> terminal_grad;
  std::function<Matrix(const Vector& x)> terminal_hess;

  Matrix wiener_covariance;  // d x d; empty means identity
  AdmissibleSet admissible;
  bool finite_difference_fallback = false;

  Matrix covariance() const;
};

/// Checks dimensions (evaluated at x_0, u = 0, t = 0), horizon and covariance.
/// Throws InvalidArgument or FactorizationError.
void validate(const ControlProblem& problem);

/// Resolves each derivative to its callback, a finite-difference fallback, or
/// a ConfigurationError naming the callback.
class Derivatives {
 public:
  explicit Derivatives(const ControlProblem& problem) : p_(problem) {}

  Matrix drift_x(const Vector& x, const Vector& u, double t) const;
  Matrix drift_u(const Vector& x, const Vector& u, double t) const;
  std::vector<Matrix> diffusion_x(const Vector& x, const Vector& u, double t) const;
  std::vector<Matrix> diffusion_u(const Vector& x, const Vector& u, double t) const;
  Vector cost_x(const Vector& x, const Vector& u, double t) const;
  Vector cost_u(const Vector& x, const Vector& u, double t) const;
  Matrix cost_xx(const Vector& x, const Vector& u, double t) const;
  Matrix cost_ux(const Vector& x, const Vector& u, double t) const;
  Vector terminal_x(const Vector& x) const;
  Matrix terminal_xx(const Vector& x) const;

 private:
  const ControlProblem& p_;
};

/// Central-difference step used by the fallback: 1e-6 * (1 + |component|).
double fd_step(double component) noexcept;

}  // namespace malgpro
