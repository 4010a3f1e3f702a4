#pragma once

#include <cstddef>

namespace malgpro {

/// Uniform partition of [0, horizon] into `steps` intervals.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  double dt() const noexcept { return dt_; }

  /// t_j = j * dt; node(steps()) returns horizon exactly.
  double node(std::size_t j) const;

  bool operator==(const TimeGrid& other) const noexcept {
    return horizon_ == other.horizon_ && steps_ == other.steps_;
  }

 private:
  double horizon_;
  std::size_t steps_;
  double dt_;
};

TimeGrid build_time_grid(double horizon, std::size_t steps);

}  // namespace malgpro
