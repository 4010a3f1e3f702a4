#include "malgpro/problem.hpp"

#include <cmath>
#include <string>

#include "malgpro/errors.hpp"
#include "malgpro/random.hpp"

namespace malgpro {

namespace {

constexpr double kSecondOrderStep = 1e-4;

template <class F>
Matrix jacobian_of(F&& f, const Vector& at, double rel_step = 1.0) {
  Matrix jac;
  Vector probe = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    const double h = fd_step(at(i)) * rel_step;
    probe(i) = at(i) + h;
    const Vector up = f(probe);
    probe(i) = at(i) - h;
    const Vector down = f(probe);
    probe(i) = at(i);
    if (jac.size() == 0) jac.resize(up.size(), at.size());
    jac.col(i) = (up - down) / (2.0 * h);
  }
  return jac;
}

template <class F>
Vector gradient_of(F&& f, const Vector& at, double rel_step = 1.0) {
  Vector grad(at.size());
  Vector probe = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    const double h = fd_step(at(i)) * rel_step;
    probe(i) = at(i) + h;
    const double up = f(probe);
    probe(i) = at(i) - h;
    const double down = f(probe);
    probe(i) = at(i);
    grad(i) = (up - down) / (2.0 * h);
  }
  return grad;
}

// Finite-difference step that is adequate when the function itself is an FD estimate.
constexpr double kNestedScale = kSecondOrderStep / 1e-6;

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols)
    throw InvalidArgument(std::string("problem: ") + what + " has shape " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                          std::to_string(cols));
}

}  // namespace

double fd_step(double component) noexcept { return 1e-6 * (1.0 + std::abs(component)); }

Matrix ControlProblem::covariance() const {
  if (wiener_covariance.size() == 0) return Matrix::Identity(noise_dim, noise_dim);
  return wiener_covariance;
}

void validate(const ControlProblem& p) {
  if (p.state_dim == 0 || p.control_dim == 0 || p.noise_dim == 0)
    throw InvalidArgument("problem: dimensions must be at least 1");
  if (!(p.horizon > 0.0)) throw InvalidArgument("problem: horizon must be positive");
  if (static_cast<std::size_t>(p.initial_state.size()) != p.state_dim)
    throw InvalidArgument("problem: initial_state length differs from state_dim");
  if (!p.drift) throw ConfigurationError("drift", "problem");
  if (!p.diffusion) throw ConfigurationError("diffusion", "problem");
  if (!p.running_cost) throw ConfigurationError("running_cost", "problem");
  if (!p.terminal_cost) throw ConfigurationError("terminal_cost", "problem");

  const std::size_t n = p.state_dim, k = p.control_dim, d = p.noise_dim;
  const Vector& x = p.initial_state;
  const Vector u = Vector::Zero(k);
  check_shape(p.drift(x, u, 0.0), n, 1, "drift");
  check_shape(p.diffusion(x, u, 0.0), n, d, "diffusion");
  if (p.drift_jac_x) check_shape(p.drift_jac_x(x, u, 0.0), n, n, "drift_jac_x");
  if (p.drift_jac_u) check_shape(p.drift_jac_u(x, u, 0.0), n, k, "drift_jac_u");
  if (p.diffusion_jac_x) {
    const auto list = p.diffusion_jac_x(x, u, 0.0);
    if (list.size() != d) throw InvalidArgument("problem: diffusion_jac_x must return noise_dim matrices");
    for (const auto& m : list) check_shape(m, n, n, "diffusion_jac_x");
  }
  if (p.diffusion_jac_u) {
    const auto list = p.diffusion_jac_u(x, u, 0.0);
    if (list.size() != d) throw InvalidArgument("problem: diffusion_jac_u must return noise_dim matrices");
    for (const auto& m : list) check_shape(m, n, k, "diffusion_jac_u");
  }
  if (p.cost_grad_x) check_shape(p.cost_grad_x(x, u, 0.0), n, 1, "cost_grad_x");
  if (p.cost_grad_u) check_shape(p.cost_grad_u(x, u, 0.0), k, 1, "cost_grad_u");
  if (p.cost_hess_xx) check_shape(p.cost_hess_xx(x, u, 0.0), n, n, "cost_hess_xx");
  if (p.cost_hess_ux) check_shape(p.cost_hess_ux(x, u, 0.0), k, n, "cost_hess_ux");
  if (p.terminal_grad) check_shape(p.terminal_grad(x), n, 1, "terminal_grad");
  if (p.terminal_hess) check_shape(p.terminal_hess(x), n, n, "terminal_hess");
  if (p.admissible.kind() == AdmissibleSet::Kind::box && static_cast<std::size_t>(p.admissible.lower().size()) != k)
    throw InvalidArgument("problem: admissible box dimension differs from control_dim");
  const Matrix q = p.covariance();
  check_shape(q, d, d, "wiener_covariance");
  covariance_factor(q);
}

Matrix Derivatives::drift_x(const Vector& x, const Vector& u, double t) const {
  if (p_.drift_jac_x) return p_.drift_jac_x(x, u, t);
  if (!p_.finite_difference_fallback) throw ConfigurationError("drift_jac_x", "derivatives");
  return jacobian_of([&](const Vector& v) { return p_.drift(v, u, t); }, x);
}

Matrix Derivatives::drift_u(const Vector& x, const Vector& u, double t) const {
  if (p_.drift_jac_u) return p_.drift_jac_u(x, u, t);
  if (!p_.finite_difference_fallback) throw ConfigurationError("drift_jac_u", "derivatives");
  return jacobian_of([&](const Vector& v) { return p_.drift(x, v, t); }, u);
}

std::vector<Matrix> Derivatives::diffusion_x(const Vector& x, const Vector& u, double t) const {
  if (p_.diffusion_jac_x) return p_.diffusion_jac_x(x, u, t);
  if (!p_.finite_difference_fallback) throw ConfigurationError("diffusion_jac_x", "derivatives");
  std::vector<Matrix> out;
  for (std::size_t l = 0; l < p_.noise_dim; ++l)
    out.push_back(jacobian_of(
        [&](const Vector& v) -> Vector { return p_.diffusion(v, u, t).col(static_cast<Eigen::Index>(l)); }, x));
  return out;
}

std::vector<Matrix> Derivatives::diffusion_u(const Vector& x, const Vector& u, double t) const {
  if (p_.diffusion_jac_u) return p_.diffusion_jac_u(x, u, t);
  if (!p_.finite_difference_fallback) throw ConfigurationError("diffusion_jac_u", "derivatives");
  std::vector<Matrix> out;
  for (std::size_t l = 0; l < p_.noise_dim; ++l)
    out.push_back(jacobian_of(
        [&](const Vector& v) -> Vector { return p_.diffusion(x, v, t).col(static_cast<Eigen::Index>(l)); }, u));
  return out;
}

Vector Derivatives::cost_x(const Vector& x, const Vector& u, double t) const {
  if (p_.cost_grad_x) return p_.cost_grad_x(x, u, t);
  if (!p_.finite_difference_fallback) throw ConfigurationError("cost_grad_x", "derivatives");
  return gradient_of([&](const Vector& v) { return p_.running_cost(v, u, t); }, x);
}

Vector Derivatives::cost_u(const Vector& x, const Vector& u, double t) const {
  if (p_.cost_grad_u) return p_.cost_grad_u(x, u, t);
  if (!p_.finite_difference_fallback) throw ConfigurationError("cost_grad_u", "derivatives");
  return gradient_of([&](const Vector& v) { return p_.running_cost(x, v, t); }, u);
}

Matrix Derivatives::cost_xx(const Vector& x, const Vector& u, double t) const {
  if (p_.cost_hess_xx) return p_.cost_hess_xx(x, u, t);
  if (!p_.finite_difference_fallback) throw ConfigurationError("cost_hess_xx", "derivatives");
  const double scale = p_.cost_grad_x ? 1.0 : kNestedScale;
  Matrix h = jacobian_of([&](const Vector& v) { return cost_x(v, u, t); }, x, scale);
  return 0.5 * (h + h.transpose());
}

Matrix Derivatives::cost_ux(const Vector& x, const Vector& u, double t) const {
  if (p_.cost_hess_ux) return p_.cost_hess_ux(x, u, t);
  if (!p_.finite_difference_fallback) throw ConfigurationError("cost_hess_ux", "derivatives");
  const double scale = p_.cost_grad_u ? 1.0 : kNestedScale;
  return jacobian_of([&](const Vector& v) { return cost_u(v, u, t); }, x, scale);
}

Vector Derivatives::terminal_x(const Vector& x) const {
  if (p_.terminal_grad) return p_.terminal_grad(x);
  if (!p_.finite_difference_fallback) throw ConfigurationError("terminal_grad", "derivatives");
  return gradient_of([&](const Vector& v) { return p_.terminal_cost(v); }, x);
}

Matrix Derivatives::terminal_xx(const Vector& x) const {
  if (p_.terminal_hess) return p_.terminal_hess(x);
  if (!p_.finite_difference_fallback) throw ConfigurationError("terminal_hess", "derivatives");
  const double scale = p_.terminal_grad ? 1.0 : kNestedScale;
  Matrix h = jacobian_of([&](const Vector& v) { return terminal_x(v); }, x, scale);
  return 0.5 * (h + h.transpose());
}

}  // namespace malgpro
