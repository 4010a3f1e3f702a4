#pragma once

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

namespace malgpro {

/// Mean and standard error of a Monte Carlo estimate.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Welford accumulator with Chan's pairwise merge. Merging in a fixed order
/// makes batch reductions independent of thread scheduling.
class Accumulator {
 public:
  void add(double x) noexcept {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  void merge(const Accumulator& o) noexcept {
    if (o.count_ == 0) return;
    if (count_ == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(count_ + o.count_);
    const double delta = o.mean_ - mean_;
    mean_ += delta * static_cast<double>(o.count_) / n;
    m2_ += o.m2_ + delta * delta * static_cast<double>(count_) * static_cast<double>(o.count_) / n;
    count_ += o.count_;
  }

  std::size_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
  double std_error() const noexcept {
    return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }
  Estimate estimate() const noexcept { return {mean(), std_error()}; }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Element-wise Accumulator over fixed-shape arrays.
class ArrayAccumulator {
 public:
  ArrayAccumulator() = default;
  ArrayAccumulator(Eigen::Index rows, Eigen::Index cols)
      : mean_(Eigen::ArrayXXd::Zero(rows, cols)), m2_(Eigen::ArrayXXd::Zero(rows, cols)) {}

  void add(const Eigen::ArrayXXd& x) {
    ++count_;
    const Eigen::ArrayXXd delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  void merge(const ArrayAccumulator& o) {
    if (o.count_ == 0) return;
    if (count_ == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(count_ + o.count_);
    const Eigen::ArrayXXd delta = o.mean_ - mean_;
    mean_ += delta * (static_cast<double>(o.count_) / n);
    m2_ += o.m2_ + delta.square() * (static_cast<double>(count_) * static_cast<double>(o.count_) / n);
    count_ += o.count_;
  }

  std::size_t count() const noexcept { return count_; }
  const Eigen::ArrayXXd& mean() const noexcept { return mean_; }
  Eigen::ArrayXXd std_error() const {
    if (count_ < 2) return Eigen::ArrayXXd::Zero(mean_.rows(), mean_.cols());
    const double c = static_cast<double>(count_);
    return (m2_ / ((c - 1.0) * c)).sqrt();
  }

 private:
  std::size_t count_ = 0;
  Eigen::ArrayXXd mean_;
  Eigen::ArrayXXd m2_;
};

}  // namespace malgpro
