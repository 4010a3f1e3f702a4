#include "malgpro/benchmarks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>

#include "malgpro/errors.hpp"
#include "malgpro/random.hpp"
#include "malgpro/riccati.hpp"

namespace malgpro {

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Vector scalar(double v) { return Vector::Constant(1, v); }
Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }

// Scalar problem with quadratic tracking cost and dx = u x dt + b(x) dw.
ControlProblem scalar_tracking(std::string name, std::function<double(double)> target,
                               std::function<double(double)> b, std::function<double(double)> b_x) {
  ControlProblem p;
  p.name = std::move(name);
  p.horizon = 1.0;
  p.initial_state = scalar(1.0);
  p.drift = [](const Vector& x, const Vector& u, double) { return scalar(u(0) * x(0)); };
  p.diffusion = [b](const Vector& x, const Vector&, double) { return scalar_matrix(b(x(0))); };
  p.running_cost = [target](const Vector& x, const Vector& u, double t) {
    const double e = x(0) - target(t);
    return 0.5 * e * e + 0.5 * u(0) * u(0);
  };
  p.terminal_cost = [](const Vector&) { return 0.0; };
  p.drift_jac_x = [](const Vector&, const Vector& u, double) { return scalar_matrix(u(0)); };
  p.drift_jac_u = [](const Vector& x, const Vector&, double) { return scalar_matrix(x(0)); };
  p.diffusion_jac_x = [b_x](const Vector& x, const Vector&, double) {
    return std::vector<Matrix>{scalar_matrix(b_x(x(0)))};
  };
  p.diffusion_jac_u = [](const Vector&, const Vector&, double) { return std::vector<Matrix>{scalar_matrix(0.0)}; };
  p.cost_grad_x = [target](const Vector& x, const Vector&, double t) { return scalar(x(0) - target(t)); };
  p.cost_grad_u = [](const Vector&, const Vector& u, double) { return scalar(u(0)); };
  p.cost_hess_xx = [](const Vector&, const Vector&, double) { return scalar_matrix(1.0); };
  p.cost_hess_ux = [](const Vector&, const Vector&, double) { return scalar_matrix(0.0); };
  p.terminal_grad = [](const Vector&) { return scalar(0.0); };
  p.terminal_hess = [](const Vector&) { return scalar_matrix(0.0); };
  return p;
}

}  // namespace

BenchmarkProblem scalar_blackscholes(double sigma) {
  const double horizon = 1.0, x0 = 1.0;
  auto denom = [=](double t) { return 1.0 / x0 - horizon * t + 0.5 * t * t; };
  auto target = [=](double t) {
    const double r = horizon - t;
    return (std::exp(sigma * sigma * t) - r * r) / denom(t) + 1.0;
  };
  BenchmarkProblem bp;
  bp.id = "scalar-bs";
  bp.problem = scalar_tracking(
      bp.id, target, [sigma](double x) { return sigma * x; }, [sigma](double) { return sigma; });
  bp.analytical_control = [=](double t) { return scalar((horizon - t) / denom(t)); };
  bp.notes = "dx = u x dt + sigma x dw, x0 = 1, T = 1; Black-Scholes type tracking problem";
  bp.metadata["sigma"] = format_double(sigma);
  return bp;
}

BenchmarkProblem scalar_sqrt_diffusion(double sigma) {
  BenchmarkProblem bp;
  bp.id = "scalar-sqrt";
  bp.problem = scalar_tracking(
      bp.id, [](double) { return 1.0; }, [sigma](double x) { return sigma * std::sqrt(1.0 + x * x); },
      [sigma](double x) { return sigma * x / std::sqrt(1.0 + x * x); });
  bp.notes = "dx = u x dt + sigma sqrt(1 + x^2) dw, x0 = 1, T = 1; no closed-form optimum";
  bp.metadata["sigma"] = format_double(sigma);
  return bp;
}

BenchmarkProblem vector_tracking() {
  const double horizon = 1.0;
  const Vector weight = (Vector(3) << 3.0, 1.0, 2.0).finished();
  const Vector offset = (Vector(3) << -0.5, 0.0, 1.0).finished();
  auto target = [=](double t) -> Vector {
    return Vector::Constant(3, 3.0 * horizon * t - 0.5 * t * t) + offset;
  };

  ControlProblem p;
  p.name = "vector-tracking";
  p.state_dim = 3;
  p.control_dim = 1;
  p.noise_dim = 3;
  p.horizon = horizon;
  p.initial_state = Vector::Constant(3, -1.0);
  p.drift = [](const Vector&, const Vector& u, double t) { return Vector::Constant(3, u(0) - 0.5 * t); };
  p.diffusion = [](const Vector&, const Vector&, double) { return Matrix::Identity(3, 3); };
  p.running_cost = [=](const Vector& x, const Vector& u, double t) {
    const Vector e = x - target(t);
    return 0.5 * e.dot(weight.cwiseProduct(e)) + 0.5 * u(0) * u(0);
  };
  p.terminal_cost = [](const Vector&) { return 0.0; };
  p.drift_jac_x = [](const Vector&, const Vector&, double) { return Matrix::Zero(3, 3); };
  p.drift_jac_u = [](const Vector&, const Vector&, double) { return Matrix::Ones(3, 1); };
  p.diffusion_jac_x = [](const Vector&, const Vector&, double) {
    return std::vector<Matrix>(3, Matrix::Zero(3, 3));
  };
  p.diffusion_jac_u = [](const Vector&, const Vector&, double) {
    return std::vector<Matrix>(3, Matrix::Zero(3, 1));
  };
  p.cost_grad_x = [=](const Vector& x, const Vector&, double t) -> Vector {
    return weight.cwiseProduct(x - target(t));
  };
  p.cost_grad_u = [](const Vector&, const Vector& u, double) -> Vector { return u; };
  p.cost_hess_xx = [=](const Vector&, const Vector&, double) -> Matrix { return weight.asDiagonal(); };
  p.cost_hess_ux = [](const Vector&, const Vector&, double) { return Matrix::Zero(1, 3); };
  p.terminal_grad = [](const Vector&) { return Vector::Zero(3); };
  p.terminal_hess = [](const Vector&) { return Matrix::Zero(3, 3); };

  BenchmarkProblem bp;
  bp.id = "vector-tracking";
  bp.problem = std::move(p);
  bp.analytical_control = [=](double t) {
    const double r6 = std::sqrt(6.0);
    return scalar(3.0 * horizon - 0.5 * t -
                  (2.5 * std::cosh(r6 * t) + r6 * std::sinh(r6 * (t - horizon))) / std::cosh(r6 * horizon));
  };
  bp.notes = "dx = (u 1 - t/2 1) dt + dw in R^3, C = diag(3, 1, 2), x0 = -1";
  return bp;
}

BenchmarkProblem vector_nonlinear(CubicIndex cubic) {
  const Eigen::Index c = cubic == CubicIndex::last_coordinate ? 1 : 0;
  const Vector r_weight = (Vector(2) << 1.0, 2.0).finished();
  const Vector c_weight = (Vector(2) << 1.0, 4.0).finished();

  ControlProblem p;
  p.name = "vector-nonlinear";
  p.state_dim = 2;
  p.control_dim = 2;
  p.noise_dim = 1;
  p.horizon = 1.0;
  p.initial_state = Vector::Constant(2, -1.0);
  p.drift = [c](const Vector& x, const Vector& u, double) {
    Vector a(2);
    a(0) = -x(0) - 2.0 * x(1) * x(1) - 0.5 * x(c) * x(c) * x(c) + u(0);
    a(1) = -std::cos(x(1)) + u(1);
    return a;
  };
  p.diffusion = [](const Vector&, const Vector& u, double) {
    Matrix b(2, 1);
    b << 0.4 + u(0), 0.2 + 2.0 * u(1);
    return b;
  };
  p.running_cost = [=](const Vector& x, const Vector& u, double) {
    return x.dot(r_weight.cwiseProduct(x)) + u.dot(c_weight.cwiseProduct(u));
  };
  p.terminal_cost = [](const Vector&) { return 0.0; };
  p.drift_jac_x = [c](const Vector& x, const Vector&, double) {
    Matrix j(2, 2);
    j << -1.0, -4.0 * x(1), 0.0, std::sin(x(1));
    j(0, c) -= 1.5 * x(c) * x(c);
    return j;
  };
  p.drift_jac_u = [](const Vector&, const Vector&, double) { return Matrix::Identity(2, 2); };
  p.diffusion_jac_x = [](const Vector&, const Vector&, double) { return std::vector<Matrix>{Matrix::Zero(2, 2)}; };
  p.diffusion_jac_u = [](const Vector&, const Vector&, double) {
    Matrix j(2, 2);
    j << 1.0, 0.0, 0.0, 2.0;
    return std::vector<Matrix>{j};
  };
  p.cost_grad_x = [=](const Vector& x, const Vector&, double) -> Vector { return 2.0 * r_weight.cwiseProduct(x); };
  p.cost_grad_u = [=](const Vector&, const Vector& u, double) -> Vector { return 2.0 * c_weight.cwiseProduct(u); };
  p.cost_hess_xx = [=](const Vector&, const Vector&, double) -> Matrix { return (2.0 * r_weight).asDiagonal(); };
  p.cost_hess_ux = [](const Vector&, const Vector&, double) { return Matrix::Zero(2, 2); };
  p.terminal_grad = [](const Vector&) { return Vector::Zero(2); };
  p.terminal_hess = [](const Vector&) { return Matrix::Zero(2, 2); };
  p.admissible = AdmissibleSet::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));

  BenchmarkProblem bp;
  bp.id = "vector-nonlinear";
  bp.problem = std::move(p);
  bp.notes = "two-dimensional nonlinear drift, control-dependent noise, box [-1, 1]^2";
  bp.metadata["cubic_index"] = cubic == CubicIndex::last_coordinate ? "last_coordinate" : "first_coordinate";
  return bp;
}

LqMatrices lq_matrices(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw InvalidArgument("lq: dim must be at least 1");
  const auto n = static_cast<Eigen::Index>(dim);
  auto rng = make_stream(seed, 0);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  Matrix u1(n, n), u2(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) u1(i, j) = uniform();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) u2(i, j) = uniform();
  return {-0.5 * u1, u2, Matrix::Identity(n, n), 0.1 * Matrix::Identity(n, n), 0.3 * Matrix::Identity(n, n)};
}

BenchmarkProblem lq_problem(std::size_t dim, std::uint64_t seed) {
  const LqMatrices m = lq_matrices(dim, seed);
  const auto n = static_cast<Eigen::Index>(dim);

  ControlProblem p;
  p.name = "lq";
  p.state_dim = dim;
  p.control_dim = dim;
  p.noise_dim = dim;
  p.horizon = 1.0;
  p.initial_state = Vector::Constant(n, -1.0);
  p.drift = [m](const Vector& x, const Vector& u, double) -> Vector { return m.a * x + m.b * u; };
  p.diffusion = [m](const Vector&, const Vector&, double) { return m.sigma; };
  p.running_cost = [m](const Vector& x, const Vector& u, double) {
    return 0.5 * (x.dot(m.q * x) + u.dot(m.r * u));
  };
  p.terminal_cost = [](const Vector&) { return 0.0; };
  p.drift_jac_x = [m](const Vector&, const Vector&, double) { return m.a; };
  p.drift_jac_u = [m](const Vector&, const Vector&, double) { return m.b; };
  p.diffusion_jac_x = [dim, n](const Vector&, const Vector&, double) {
    return std::vector<Matrix>(dim, Matrix::Zero(n, n));
  };
  p.diffusion_jac_u = [dim, n](const Vector&, const Vector&, double) {
    return std::vector<Matrix>(dim, Matrix::Zero(n, n));
  };
  p.cost_grad_x = [m](const Vector& x, const Vector&, double) -> Vector { return m.q * x; };
  p.cost_grad_u = [m](const Vector&, const Vector& u, double) -> Vector { return m.r * u; };
  p.cost_hess_xx = [m](const Vector&, const Vector&, double) { return m.q; };
  p.cost_hess_ux = [n](const Vector&, const Vector&, double) { return Matrix::Zero(n, n); };
  p.terminal_grad = [n](const Vector&) { return Vector::Zero(n); };
  p.terminal_hess = [n](const Vector&) { return Matrix::Zero(n, n); };

  // Reference optimum on a fine Riccati grid, linearly interpolated in t.
  constexpr std::size_t kFineSteps = 2000;
  const TimeGrid fine(p.horizon, kFineSteps);
  auto sol = std::make_shared<const RiccatiSolution>(riccati_oracle(m.a, m.b, m.q, m.r, p.initial_state, fine));
  const Matrix r_inv_bt = m.r.llt().solve(m.b.transpose());

  BenchmarkProblem bp;
  bp.id = "lq";
  bp.problem = std::move(p);
  bp.analytical_control = [sol, r_inv_bt, fine](double t) -> Vector {
    const double pos = std::clamp(t / fine.dt(), 0.0, static_cast<double>(fine.steps()));
    const auto lo = std::min(static_cast<std::size_t>(pos), fine.steps() - 1);
    const double w = pos - static_cast<double>(lo);
    const auto lc = static_cast<Eigen::Index>(lo);
    const Matrix pm = (1.0 - w) * sol->p[lo] + w * sol->p[lo + 1];
    const Vector mm = (1.0 - w) * sol->mean_path.col(lc) + w * sol->mean_path.col(lc + 1);
    return -r_inv_bt * pm * mm;
  };
  bp.notes = "dx = (A x + B u) dt + 0.3 dw, A = -0.5 U1, B = U2, Q = I, R = 0.1 I, x0 = -1";
  bp.metadata["dim"] = std::to_string(dim);
  bp.metadata["seed"] = std::to_string(seed);
  return bp;
}

const std::vector<std::string>& benchmark_ids() {
  static const std::vector<std::string> ids{"scalar-bs", "scalar-sqrt", "vector-tracking", "vector-nonlinear", "lq"};
  return ids;
}

BenchmarkProblem make_benchmark(const std::string& id, const BenchmarkParams& params) {
  if (id == "scalar-bs") return scalar_blackscholes(params.sigma.value_or(0.01));
  if (id == "scalar-sqrt") return scalar_sqrt_diffusion(params.sigma.value_or(0.5));
  if (id == "vector-tracking") return vector_tracking();
  if (id == "vector-nonlinear") return vector_nonlinear(params.cubic);
  if (id == "lq") return lq_problem(params.dim, params.seed);
  std::string list;
  for (const auto& known : benchmark_ids()) list += (list.empty() ? "" : ", ") + known;
  throw LookupError("unknown problem id '" + id + "'; valid ids: " + list);
}

}  // namespace malgpro
