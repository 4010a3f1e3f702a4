#pragma once

#include <cstddef>
#include <vector>

#include "malgpro/problem.hpp"
#include "malgpro/simulate.hpp"

namespace malgpro {

enum class FlowMode { factorized, dense };

/// Factorized first-variation flow of one path: Gamma_{s,t} = Y_t Z_s.
struct FactorizedFlow {
  std::vector<Matrix> y;  // N+1 matrices, y[0] = I
  std::vector<Matrix> z;  // N+1 matrices, z[0] = I
};

/// Largest accepted ||Y||_1 ||Z||_1 before factorized mode gives up.
inline constexpr double kMaxFlowCondition = 1e8;

/// Gamma_{t_r, t_j} for j = r..N (element i holds j = r + i), by Euler-Maruyama on
/// dGamma = (J_x a dt + sum_l J_x b_l dw^l) Gamma reusing the path's increments.
std::vector<Matrix> propagate_flow_from(std::size_t anchor, const Path& path, const ControlProblem& problem,
                                        const PiecewiseControl& control);

/// Y and Z on every node. Y follows the Euler step of the flow; Z right-multiplies
///   Z_{j+1} = Z_j (I + M_j)^{-1},  M_j = J_x a dt + sum_l J_x b_l dw^l.
/// Expanding the inverse gives Z_j (I - M_j + M_j^2 - ...), the Euler step of the
/// inverse-flow equation with its Ito correction, and keeps Z_j Y_j = I exactly.
/// Throws IllConditionedFlowError when ||Y||_1 ||Z||_1 exceeds kMaxFlowCondition.
FactorizedFlow propagate_flow_factorized(const Path& path, const ControlProblem& problem,
                                         const PiecewiseControl& control);

/// Flow of one path in either storage mode.
class PathFlow {
 public:
  static PathFlow factorized(FactorizedFlow flow);
  /// Runs propagate_flow_from for every anchor: O(N^2) matrices.
  static PathFlow dense(const Path& path, const ControlProblem& problem, const PiecewiseControl& control);

  FlowMode mode() const noexcept { return mode_; }
  std::size_t steps() const noexcept { return steps_; }

  /// Gamma_{t_s, t_t}; identity when s == t. Throws InvalidArgument if s > t.
  Matrix gamma(std::size_t s, std::size_t t) const;

  const FactorizedFlow& factors() const;

 private:
  FlowMode mode_ = FlowMode::factorized;
  std::size_t steps_ = 0;
  FactorizedFlow factors_;
  std::vector<std::vector<Matrix>> dense_;  // dense_[r][j - r]
};

/// Flows of every path in a bundle. Factorized mode falls back to dense per path
/// when the condition guard trips.
struct FlowBundle {
  TimeGrid grid;
  std::vector<PathFlow> flows;
};

FlowBundle compute_flows(const PathBundle& paths, const ControlProblem& problem, const PiecewiseControl& control,
                         FlowMode mode = FlowMode::factorized);

/// D_{t_r} x_{t_j} = Gamma_{t_r,t_j} B(x_{t_r}, u_{t_r}) for j >= r.
class MalliavinSlice {
 public:
  MalliavinSlice(std::size_t anchor, std::vector<Matrix> derivatives)
      : anchor_(anchor), derivatives_(std::move(derivatives)) {}

  std::size_t anchor() const noexcept { return anchor_; }
  /// n x d matrix at node j. Throws InvalidArgument for j < anchor or j > N.
  const Matrix& at(std::size_t j) const;

 private:
  std::size_t anchor_;
  std::vector<Matrix> derivatives_;
};

MalliavinSlice malliavin_derivative(const PathFlow& flow, const Path& path, const ControlProblem& problem,
                                    const PiecewiseControl& control, std::size_t anchor);

/// Exponent of the scalar flow, log eta_{t_j} = sum_{i<j} (a_x - b_x^2/2) dt + b_x dw_i,
/// for j = 0..N. Requires n = d = 1.
Vector scalar_log_flow(const Path& path, const ControlProblem& problem, const PiecewiseControl& control);

/// b(x_s,u_s) exp(log eta_t - log eta_s). Requires n = d = 1 and |b(x_s,u_s)| >= 1e-12.
double scalar_malliavin_closed_form(const Path& path, const ControlProblem& problem,
                                   const PiecewiseControl& control, std::size_t s, std::size_t t);

}  // namespace malgpro
