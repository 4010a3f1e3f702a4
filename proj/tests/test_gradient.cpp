#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "malgpro/benchmarks.hpp"
#include "malgpro/errors.hpp"
#include "malgpro/gradient.hpp"
#include "malgpro/solver.hpp"
#include "support.hpp"

using namespace malgpro;
using testing::mat1;
using testing::vec1;

namespace {

// L depends on u only, a is u-free, b is u-free: the gradient is L_u.
ControlProblem control_cost_only(std::size_t n, std::size_t k) {
  const auto ni = static_cast<Eigen::Index>(n), ki = static_cast<Eigen::Index>(k);
  ControlProblem p = testing::linear_additive(-0.3 * Matrix::Identity(ni, ni), Matrix::Zero(ni, ki),
                                              0.5 * Matrix::Identity(ni, ni), Vector::Ones(ni));
  p.running_cost = [](const Vector&, const Vector& u, double t) { return (1.0 + t) * u.squaredNorm(); };
  p.terminal_cost = [](const Vector&) { return 0.0; };
  p.cost_grad_x = [ni](const Vector&, const Vector&, double) { return Vector::Zero(ni); };
  p.cost_grad_u = [](const Vector&, const Vector& u, double t) -> Vector { return 2.0 * (1.0 + t) * u; };
  p.cost_hess_xx = [ni](const Vector&, const Vector&, double) { return Matrix::Zero(ni, ni); };
  p.terminal_grad = [ni](const Vector&) { return Vector::Zero(ni); };
  p.terminal_hess = [ni](const Vector&) { return Matrix::Zero(ni, ni); };
  return p;
}

}  // namespace

TEST_CASE("gradient reduces to L_u when the state does not feel the control") {
  const TimeGrid grid(1.0, 40);
  for (std::size_t k : {1, 2}) {
    const std::size_t n = k == 1 ? 1 : 3;
    const ControlProblem p = control_cost_only(n, k);
    Matrix values(static_cast<Eigen::Index>(k), 40);
    for (Eigen::Index j = 0; j < 40; ++j)
      for (Eigen::Index c = 0; c < values.rows(); ++c) values(c, j) = std::sin(0.3 * j + c);
    const PiecewiseControl u(grid, values);
    const GradientEstimate g = gateaux_gradient(p, u, 64, 5);
    for (Eigen::Index j = 0; j < 40; ++j)
      for (Eigen::Index c = 0; c < values.rows(); ++c)
        CHECK(g.mean(c, j) == doctest::Approx(2.0 * (1.0 + grid.node(static_cast<std::size_t>(j))) * values(c, j)));
    CHECK(g.paths_used == 64);
    CHECK(g.paths_diverged == 0);
  }
}

TEST_CASE("zero cost gives a zero residual") {
  ControlProblem p = testing::gbm(0.2, 0.3);
  p.terminal_cost = [](const Vector&) { return 0.0; };
  p.terminal_grad = [](const Vector&) { return vec1(0.0); };
  p.drift_jac_u = [](const Vector& x, const Vector&, double) { return mat1(x(0)); };
  const PiecewiseControl u(TimeGrid(1.0, 30), 1);
  const Residual r = optimality_residual(p, u, 100, 1);
  CHECK(r.value == 0.0);
}

TEST_CASE("scalar and vector routes agree on a scalar problem") {
  const BenchmarkProblem bench = scalar_sqrt_diffusion();
  const TimeGrid grid(1.0, 50);
  Matrix values(1, 50);
  for (Eigen::Index j = 0; j < 50; ++j) values(0, j) = 0.4 - 0.01 * j;
  const PiecewiseControl u(grid, values);
  const GradientEstimate s = gateaux_gradient_scalar(bench.problem, u, 200, 3);
  const GradientEstimate v = gateaux_gradient_vector(bench.problem, u, 200, 3, FlowMode::factorized);
  const GradientEstimate d = gateaux_gradient_vector(bench.problem, u, 200, 3, FlowMode::dense);
  // The vector route's Euler flow and the scalar route's exponential flow differ at O(dt).
  CHECK((s.mean - v.mean).cwiseAbs().maxCoeff() <= 10 * grid.dt() * s.mean.cwiseAbs().maxCoeff());
  CHECK((v.mean - d.mean).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + v.mean.cwiseAbs().maxCoeff()));
  CHECK(s.cost.mean == v.cost.mean);
}

TEST_CASE("dense and factorized assemblies agree with the Hessian bracket active") {
  const BenchmarkProblem bench = vector_nonlinear();
  const TimeGrid grid(1.0, 50);
  const PiecewiseControl u(grid, Matrix::Constant(2, 50, 0.3), bench.problem.admissible);
  const GradientEstimate f = gateaux_gradient_vector(bench.problem, u, 64, 9, FlowMode::factorized);
  const GradientEstimate d = gateaux_gradient_vector(bench.problem, u, 64, 9, FlowMode::dense);
  CHECK((f.mean - d.mean).cwiseAbs().maxCoeff() <= 10 * grid.dt() * d.mean.cwiseAbs().maxCoeff());
}

TEST_CASE("missing second derivatives are reported when b_u is nonzero") {
  BenchmarkProblem bench = vector_nonlinear();
  bench.problem.cost_hess_xx = nullptr;
  const PiecewiseControl u(TimeGrid(1.0, 20), 2, bench.problem.admissible);
  try {
    gateaux_gradient(bench.problem, u, 4, 1);
    FAIL("expected a configuration error");
  } catch (const ConfigurationError& e) {
    CHECK(e.callback() == "cost_hess_xx");
  }

  // Not needed when the diffusion ignores the control.
  BenchmarkProblem sqrt_bench = scalar_sqrt_diffusion();
  sqrt_bench.problem.cost_hess_xx = nullptr;
  sqrt_bench.problem.terminal_hess = nullptr;
  CHECK_NOTHROW(gateaux_gradient(sqrt_bench.problem, PiecewiseControl(TimeGrid(1.0, 20), 1), 4, 1));
}

TEST_CASE("gradient matches common-random-number finite differences on a linear problem") {
  Matrix a(2, 2), b(2, 1), s(2, 2);
  a << -0.4, 0.3, 0.0, -0.2;
  b << 1.0, 0.5;
  s << 0.3, 0.0, 0.1, 0.2;
  const ControlProblem p = testing::linear_additive(a, b, s, Vector::Ones(2));
  const TimeGrid grid(1.0, 50);
  const PiecewiseControl u(grid, Matrix::Constant(1, 50, -0.2));
  const std::size_t m = 2000;
  const GradientEstimate g = gateaux_gradient(p, u, m, 14);
  for (Eigen::Index j : {0, 17, 49}) {
    const Estimate fd = testing::fd_gradient(p, u, 0, j, 1e-4, m, 14);
    CHECK(testing::agrees(g.mean(0, j), g.std_error(0, j), fd.mean, fd.std_error));
  }
}

TEST_CASE("analytical Black-Scholes control is critical up to an O(dt) bias") {
  // At finite dt the sampled closed-form control is not the discrete optimum; the
  // residual is a deterministic O(dt) bias far above the Monte Carlo error for
  // sigma = 0.01. Richardson extrapolation removes it.
  const BenchmarkProblem bench = scalar_blackscholes();
  std::vector<Residual> res;
  for (std::size_t steps : {100, 200}) {
    const TimeGrid grid(1.0, steps);
    const PiecewiseControl u(grid, sample_reference(bench.analytical_control, grid));
    res.push_back(optimality_residual(bench.problem, u, 10000, 6));
  }
  MESSAGE("residual dt=1e-2: " << res[0].value << " +- " << res[0].std_error
                               << ", dt=5e-3: " << res[1].value << " +- " << res[1].std_error);
  // Node-wise: g_{dt}(t) - 2 g_{dt/2}(t) at common times.
  double worst = 0.0, worst_se = 0.0;
  for (Eigen::Index j = 0; j < 100; ++j) {
    const double extrapolated = 2.0 * res[1].gradient.mean(0, 2 * j) - res[0].gradient.mean(0, j);
    worst = std::max(worst, std::abs(extrapolated));
    worst_se = std::max(worst_se, std::hypot(2.0 * res[1].gradient.std_error(0, 2 * j),
                                             res[0].gradient.std_error(0, j)));
  }
  MESSAGE("extrapolated residual " << worst << ", se " << worst_se);
  CHECK(res[1].value / res[0].value == doctest::Approx(0.5).epsilon(0.1));
  CHECK(worst <= 3.0 * worst_se + 0.02 * res[0].value);

  const Residual far = optimality_residual(bench.problem, PiecewiseControl(TimeGrid(1.0, 100), 1), 10000, 6);
  CHECK(far.value > 10.0 * far.std_error);
  const Estimate fd = testing::fd_gradient(bench.problem, PiecewiseControl(TimeGrid(1.0, 100), 1), 0,
                                           static_cast<Eigen::Index>(far.node), 1e-4, 10000, 6);
  CHECK(testing::agrees(far.gradient.mean(0, static_cast<Eigen::Index>(far.node)),
                        far.gradient.std_error(0, static_cast<Eigen::Index>(far.node)), fd.mean, fd.std_error));
}

TEST_CASE("vector tracking gradient matches its deterministic discrete value") {
  // Additive noise and a state-free drift: the mean path is deterministic and the
  // node-j Gateaux derivative is u_j + dt sum_{m>j} 1^T C (E x_m - x*_m).
  const BenchmarkProblem bench = vector_tracking();
  const TimeGrid grid(1.0, 100);
  const PiecewiseControl u(grid, sample_reference(bench.analytical_control, grid));
  const GradientEstimate g = gateaux_gradient(bench.problem, u, 10000, 8);
  const double dt = grid.dt();
  const Vector weight = (Vector(3) << 3.0, 1.0, 2.0).finished();
  const Vector offset = (Vector(3) << -0.5, 0.0, 1.0).finished();
  std::vector<double> bracket(101, 0.0);
  Vector mean = Vector::Constant(3, -1.0);
  for (std::size_t m = 0; m < 100; ++m) {
    const double t = grid.node(m);
    const Vector target = Vector::Constant(3, 3.0 * t - 0.5 * t * t) + offset;
    bracket[m] = weight.dot(mean - target);
    mean += Vector::Constant(3, u.values()(0, static_cast<Eigen::Index>(m)) - 0.5 * t) * dt;
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < 100; ++j) {
    double expected = u.values()(0, static_cast<Eigen::Index>(j));
    for (std::size_t m = j + 1; m < 100; ++m) expected += dt * bracket[m];
    const auto jc = static_cast<Eigen::Index>(j);
    const double gap = std::abs(g.mean(0, jc) - expected);
    if (g.std_error(0, jc) == 0.0) {
      CHECK(gap <= 1e-12);
    } else {
      worst = std::max(worst, gap / g.std_error(0, jc));
    }
  }
  MESSAGE("max gap / se " << worst);
  CHECK(worst <= 4.5);
}

TEST_CASE("results do not depend on the thread count") {
  const BenchmarkProblem bench = vector_nonlinear();
  const PiecewiseControl u(TimeGrid(1.0, 30), Matrix::Constant(2, 30, 0.1), bench.problem.admissible);
  setenv("MALGPRO_THREADS", "1", 1);
  const GradientEstimate one = gateaux_gradient(bench.problem, u, 150, 2);
  setenv("MALGPRO_THREADS", "4", 1);
  const GradientEstimate four = gateaux_gradient(bench.problem, u, 150, 2);
  unsetenv("MALGPRO_THREADS");
  CHECK((one.mean.array() == four.mean.array()).all());
  CHECK((one.std_error.array() == four.std_error.array()).all());
  CHECK(one.cost.mean == four.cost.mean);
}

TEST_CASE("diverged paths are skipped and counted") {
  ControlProblem p = testing::gbm(0.0, 3.0, 1.0);
  p.drift = [](const Vector& x, const Vector& u, double) { return vec1(x(0) * x(0) * x(0) + u(0)); };
  p.drift_jac_x = [](const Vector& x, const Vector&, double) { return mat1(3.0 * x(0) * x(0)); };
  p.drift_jac_u = [](const Vector&, const Vector&, double) { return mat1(1.0); };
  const PiecewiseControl u(TimeGrid(1.0, 20), 1);
  const GradientEstimate g = gateaux_gradient(p, u, 64, 4);
  CHECK(g.paths_diverged > 0);
  CHECK(g.paths_used + g.paths_diverged == 64);
}
