#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "malgpro/time_grid.hpp"

namespace malgpro {

/// Unbounded set or a (possibly half-infinite) box in R^k.
class AdmissibleSet {
 public:
  enum class Kind { unbounded, box };

  AdmissibleSet() = default;
  static AdmissibleSet unbounded() { return {}; }
  static AdmissibleSet box(Eigen::VectorXd lower, Eigen::VectorXd upper);

  Kind kind() const noexcept { return kind_; }
  const Eigen::VectorXd& lower() const noexcept { return lower_; }
  const Eigen::VectorXd& upper() const noexcept { return upper_; }

  bool contains(const Eigen::VectorXd& u) const;
  /// Euclidean projection of one control value.
  Eigen::VectorXd project(const Eigen::VectorXd& u) const;

 private:
  Kind kind_ = Kind::unbounded;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

/// Deterministic control, constant on each [t_j, t_{j+1}).
/// Column j of values() is the value on interval j.
class PiecewiseControl {
 public:
  /// Zero control projected onto `set`.
  PiecewiseControl(const TimeGrid& grid, std::size_t control_dim, AdmissibleSet set = {});
  /// Takes `values` (k x N) as given and projects it.
  PiecewiseControl(const TimeGrid& grid, Eigen::MatrixXd values, AdmissibleSet set = {});

  const TimeGrid& grid() const noexcept { return grid_; }
  const AdmissibleSet& admissible_set() const noexcept { return set_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  /// Value on interval j; j == N returns the last interval's value.
  Eigen::VectorXd at(std::size_t j) const;

 private:
  TimeGrid grid_;
  AdmissibleSet set_;
  Eigen::MatrixXd values_;
};

/// Continuous-time reference control, e.g. an analytical optimum.
using ReferenceControl = std::function<Eigen::VectorXd(double t)>;

/// Control error sum_j ||u_{t_j} - u_ref(t_j)||^2 dt over the control's grid.
double control_error(const PiecewiseControl& u, const ReferenceControl& reference);

/// `reference` sampled at the left node of every interval, k x N.
Eigen::MatrixXd sample_reference(const ReferenceControl& reference, const TimeGrid& grid);

}  // namespace malgpro
