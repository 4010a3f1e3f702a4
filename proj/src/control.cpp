#include "malgpro/control.hpp"

#include <cmath>

#include "malgpro/errors.hpp"

namespace malgpro {

AdmissibleSet AdmissibleSet::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  if (lower.size() != upper.size()) throw InvalidArgument("admissible set: bound lengths differ");
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) > upper(i))
      throw InvalidArgument("admissible set: lower bound exceeds upper bound");
  AdmissibleSet set;
  set.kind_ = Kind::box;
  set.lower_ = std::move(lower);
  set.upper_ = std::move(upper);
  return set;
}

bool AdmissibleSet::contains(const Eigen::VectorXd& u) const {
  if (kind_ == Kind::unbounded) return true;
  return (u.array() >= lower_.array()).all() && (u.array() <= upper_.array()).all();
}

Eigen::VectorXd AdmissibleSet::project(const Eigen::VectorXd& u) const {
  if (kind_ == Kind::unbounded) return u;
  if (u.size() != lower_.size()) throw InvalidArgument("admissible set: dimension mismatch");
  return u.cwiseMax(lower_).cwiseMin(upper_);
}

PiecewiseControl::PiecewiseControl(const TimeGrid& grid, std::size_t control_dim, AdmissibleSet set)
    : PiecewiseControl(grid, Eigen::MatrixXd::Zero(control_dim, grid.steps()), std::move(set)) {}

PiecewiseControl::PiecewiseControl(const TimeGrid& grid, Eigen::MatrixXd values, AdmissibleSet set)
    : grid_(grid), set_(std::move(set)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.cols()) != grid_.steps())
    throw InvalidArgument("piecewise control: expected one column per interval");
  if (values_.rows() == 0) throw InvalidArgument("piecewise control: control dimension must be positive");
  if (set_.kind() == AdmissibleSet::Kind::box) {
    if (set_.lower().size() != values_.rows()) throw InvalidArgument("piecewise control: set dimension mismatch");
    for (Eigen::Index j = 0; j < values_.cols(); ++j) values_.col(j) = set_.project(values_.col(j));
  }
}

Eigen::VectorXd PiecewiseControl::at(std::size_t j) const {
  if (j > grid_.steps()) throw InvalidArgument("piecewise control: interval index out of range");
  const auto col = static_cast<Eigen::Index>(std::min(j, grid_.steps() - 1));
  return values_.col(col);
}

Eigen::MatrixXd sample_reference(const ReferenceControl& reference, const TimeGrid& grid) {
  Eigen::MatrixXd out;
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    const Eigen::VectorXd v = reference(grid.node(j));
    if (out.size() == 0) out.resize(v.size(), static_cast<Eigen::Index>(grid.steps()));
    out.col(static_cast<Eigen::Index>(j)) = v;
  }
  return out;
}

double control_error(const PiecewiseControl& u, const ReferenceControl& reference) {
  const Eigen::MatrixXd ref = sample_reference(reference, u.grid());
  if (ref.rows() != u.values().rows()) throw InvalidArgument("control_error: dimension mismatch");
  return (u.values() - ref).colwise().squaredNorm().sum() * u.grid().dt();
}

}  // namespace malgpro
