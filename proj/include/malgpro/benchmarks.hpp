#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "malgpro/control.hpp"
#include "malgpro/problem.hpp"

namespace malgpro {

/// A registered test problem with its optional analytical optimum.
struct BenchmarkProblem {
  std::string id;
  ControlProblem problem;
  ReferenceControl analytical_control;  // empty when no closed form is known
  std::string notes;
  std::map<std::string, std::string> metadata;

  bool has_analytical_control() const { return static_cast<bool>(analytical_control); }
};

/// dx = u x dt + sigma x dw, J = 1/2 int E(x - x*)^2 + 1/2 int u^2.
BenchmarkProblem scalar_blackscholes(double sigma = 0.01);

/// dx = u x dt + sigma sqrt(1 + x^2) dw, J = 1/2 int E(x - 1)^2 + 1/2 int u^2.
BenchmarkProblem scalar_sqrt_diffusion(double sigma = 0.5);

/// Three-dimensional tracking problem with scalar control and identity noise.
BenchmarkProblem vector_tracking();

/// The drift's cubic term names a third state coordinate that a two-dimensional
/// state does not have; this picks the coordinate it is read from.
enum class CubicIndex { last_coordinate, first_coordinate };

/// Two-dimensional nonlinear problem with control-dependent noise on the box [-1, 1]^2.
BenchmarkProblem vector_nonlinear(CubicIndex cubic = CubicIndex::last_coordinate);

inline constexpr std::uint64_t kDefaultLqSeed = 20240611;

/// Matrices of the LQ benchmark.
struct LqMatrices {
  Matrix a;      // -0.5 U1
  Matrix b;      // U2
  Matrix q;      // state cost weight, I
  Matrix r;      // control cost weight, 0.1 I
  Matrix sigma;  // 0.3 I
};

LqMatrices lq_matrices(std::size_t dim, std::uint64_t seed);

/// dx = (A x + B u) dt + 0.3 dw with A = -0.5 U1, B = U2, U_i uniform on [0,1] from `seed`.
BenchmarkProblem lq_problem(std::size_t dim = 10, std::uint64_t seed = kDefaultLqSeed);

/// Constructor parameters selectable by name.
struct BenchmarkParams {
  std::size_t dim = 10;
  std::uint64_t seed = kDefaultLqSeed;
  CubicIndex cubic = CubicIndex::last_coordinate;
  std::optional<double> sigma;
};

/// "scalar-bs", "scalar-sqrt", "vector-tracking", "vector-nonlinear", "lq".
const std::vector<std::string>& benchmark_ids();

/// Throws LookupError listing the valid identifiers.
BenchmarkProblem make_benchmark(const std::string& id, const BenchmarkParams& params = {});

}  // namespace malgpro
