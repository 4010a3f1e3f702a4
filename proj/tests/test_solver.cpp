#include <doctest.h>

#include <cmath>
#include <random>

#include "malgpro/benchmarks.hpp"
#include "malgpro/errors.hpp"
#include "malgpro/solver.hpp"
#include "support.hpp"

using namespace malgpro;
using testing::mat1;
using testing::vec1;

namespace {

AdmissibleSet unit_box(Eigen::Index k) { return AdmissibleSet::box(-Vector::Ones(k), Vector::Ones(k)); }

// J = int (u - target)^2 dt with a state that ignores u: the optimum is u = target.
ControlProblem quadratic_in_u(double target, Sense sense) {
  ControlProblem p = testing::gbm(0.0, 0.2);
  const double s = sense == Sense::minimize ? 1.0 : -1.0;
  p.sense = sense;
  p.terminal_cost = [](const Vector&) { return 0.0; };
  p.terminal_grad = [](const Vector&) { return vec1(0.0); };
  p.running_cost = [=](const Vector&, const Vector& u, double) { return s * (u(0) - target) * (u(0) - target); };
  p.cost_grad_u = [=](const Vector&, const Vector& u, double) { return vec1(2.0 * s * (u(0) - target)); };
  return p;
}

}  // namespace

TEST_CASE("projection clamps, is idempotent and non-expansive") {
  const TimeGrid grid(1.0, 3);
  Matrix in(1, 3);
  in << 1.5, -0.2, -7.0;
  const PiecewiseControl p = project(in, grid, unit_box(1));
  CHECK(p.values()(0, 0) == 1.0);
  CHECK(p.values()(0, 1) == -0.2);
  CHECK(p.values()(0, 2) == -1.0);
  CHECK((project(p.values(), grid, unit_box(1)).values().array() == p.values().array()).all());
  CHECK((project(in, grid, AdmissibleSet::unbounded()).values().array() == in.array()).all());

  const AdmissibleSet half = AdmissibleSet::box(Vector::Constant(1, 0.0),
                                                Vector::Constant(1, std::numeric_limits<double>::infinity()));
  CHECK(project(in, grid, half).values()(0, 0) == 1.5);
  CHECK(project(in, grid, half).values()(0, 2) == 0.0);
  CHECK_THROWS_AS(AdmissibleSet::box(Vector::Constant(1, 1.0), Vector::Constant(1, 0.0)), InvalidArgument);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix a(2, 4), b(2, 4);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a(i) = normal(rng);
      b(i) = normal(rng);
    }
    const TimeGrid g4(1.0, 4);
    const Matrix pa = project(a, g4, unit_box(2)).values(), pb = project(b, g4, unit_box(2)).values();
    CHECK((pa - pb).norm() <= (a - b).norm() + 1e-15);
  }
}

TEST_CASE("projected step") {
  const TimeGrid grid(1.0, 2);
  Matrix u0(1, 2);
  u0 << 0.9, 0.1;
  const PiecewiseControl u(grid, u0, unit_box(1));
  const Matrix zero = Matrix::Zero(1, 2);
  CHECK((step(u, zero, 0.5, Sense::minimize).values().array() == u0.array()).all());

  Matrix g(1, 2);
  g << -0.3, 0.4;
  const PiecewiseControl free(grid, u0);
  CHECK(step(free, g, 1.0, Sense::minimize).values().isApprox(u0 - g));
  CHECK(step(free, g, 1.0, Sense::maximize).values().isApprox(u0 + g));

  const PiecewiseControl clamped = step(u, g, 1.0, Sense::minimize);
  CHECK(clamped.values()(0, 0) == 1.0);
  CHECK(clamped.values()(0, 1) == doctest::Approx(-0.3));

  Matrix poisoned = g;
  poisoned(0, 1) = std::nan("");
  CHECK_THROWS_AS(step(u, poisoned, 1.0, Sense::minimize), PoisonedGradientError);
}

TEST_CASE("rate schedule interpolates linearly") {
  const RateSchedule r{0.01, 0.03};
  CHECK(r.at(0, 11) == doctest::Approx(0.01));
  CHECK(r.at(5, 11) == doctest::Approx(0.02));
  CHECK(r.at(10, 11) == doctest::Approx(0.03));
  CHECK(RateSchedule::constant(0.2).at(7, 9) == 0.2);
}

TEST_CASE("a fixed point terminates on the gradient tolerance") {
  const ControlProblem p = quadratic_in_u(0.4, Sense::minimize);
  SolveOptions o;
  o.grid = TimeGrid(1.0, 20);
  o.batch = 16;
  o.initial_values = Matrix::Constant(1, 20, 0.4);
  const SolveResult r = solve(p, o);
  CHECK(r.termination == Termination::gradient_tolerance);
  CHECK(r.iterations == 1);
  CHECK((r.control.values().array() == 0.4).all());
  CHECK(r.objective.size() == r.iterations);
  CHECK(r.gradient_norm.size() == r.iterations);
  CHECK(r.wall_ms.size() == r.iterations);
}

TEST_CASE("minimization and maximization reach the same stationary point") {
  for (Sense sense : {Sense::minimize, Sense::maximize}) {
    const ControlProblem p = quadratic_in_u(0.7, sense);
    SolveOptions o;
    o.grid = TimeGrid(1.0, 10);
    o.batch = 8;
    o.rate = RateSchedule::constant(0.2);
    o.max_iterations = 200;
    o.gradient_tolerance = 1e-10;
    o.reference = [](double) { return vec1(0.7); };
    const SolveResult r = solve(p, o);
    CHECK(r.control.values().isApprox(Matrix::Constant(1, 10, 0.7), 1e-8));
    CHECK(r.control_error.size() == r.iterations);
    CHECK(r.control_error.back() < 1e-16);
  }
}

TEST_CASE("max iterations and objective stall") {
  const BenchmarkProblem bench = scalar_blackscholes();
  SolveOptions o;
  o.grid = TimeGrid(1.0, 20);
  o.batch = 10;
  o.max_iterations = 7;
  const SolveResult r = solve(bench.problem, o);
  CHECK(r.termination == Termination::max_iterations);
  CHECK(r.iterations == 7);

  // A deterministic objective that barely moves under a tiny rate.
  const ControlProblem p = quadratic_in_u(0.7, Sense::minimize);
  SolveOptions s;
  s.grid = TimeGrid(1.0, 10);
  s.batch = 4;
  s.rate = RateSchedule::constant(1e-12);
  s.max_iterations = 100;
  const SolveResult stalled = solve(p, s);
  CHECK(stalled.termination == Termination::objective_stall);
  CHECK(stalled.iterations == 11);
}

TEST_CASE("solves are reproducible") {
  const BenchmarkProblem bench = scalar_sqrt_diffusion();
  SolveOptions o;
  o.grid = TimeGrid(1.0, 20);
  o.batch = 50;
  o.max_iterations = 15;
  o.master_seed = 99;
  const SolveResult a = solve(bench.problem, o), b = solve(bench.problem, o);
  CHECK((a.control.values().array() == b.control.values().array()).all());
  for (std::size_t i = 0; i < a.iterations; ++i) CHECK(a.objective[i].mean == b.objective[i].mean);
}

TEST_CASE("too many diverged paths abort the solve") {
  ControlProblem p = testing::gbm(0.0, 3.0, 1.0);
  p.drift = [](const Vector& x, const Vector& u, double) { return vec1(x(0) * x(0) * x(0) + u(0)); };
  p.drift_jac_x = [](const Vector& x, const Vector&, double) { return mat1(3.0 * x(0) * x(0)); };
  p.drift_jac_u = [](const Vector&, const Vector&, double) { return mat1(1.0); };
  SolveOptions o;
  o.grid = TimeGrid(1.0, 20);
  o.batch = 64;
  o.max_iterations = 3;
  CHECK_THROWS_AS(solve(p, o), UnstableProblemError);
}

TEST_CASE("objective decreases on the LQ problem") {
  const BenchmarkProblem bench = lq_problem(10);
  SolveOptions o;
  o.grid = TimeGrid(1.0, 100);
  o.batch = 1000;
  o.rate = RateSchedule::constant(1e-2);
  o.max_iterations = 20;
  o.master_seed = 5;
  const SolveResult r = solve(bench.problem, o);
  for (std::size_t i = 1; i < r.iterations; ++i)
    CHECK(r.objective[i].mean <=
          r.objective[i - 1].mean + 3.0 * std::hypot(r.objective[i].std_error, r.objective[i - 1].std_error));
  CHECK(r.objective.back().mean < r.objective.front().mean);
}
