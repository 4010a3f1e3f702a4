#include "malgpro/time_grid.hpp"

#include <cmath>

#include "malgpro/errors.hpp"

namespace malgpro {

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps), dt_(0.0) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("time grid: horizon must be positive");
  if (steps == 0) throw InvalidArgument("time grid: steps must be at least 1");
  dt_ = horizon / static_cast<double>(steps);
}

double TimeGrid::node(std::size_t j) const {
  if (j > steps_) throw InvalidArgument("time grid: node index out of range");
  if (j == steps_) return horizon_;
  return static_cast<double>(j) * dt_;
}

TimeGrid build_time_grid(double horizon, std::size_t steps) { return TimeGrid(horizon, steps); }

}  // namespace malgpro
