#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "malgpro/time_grid.hpp"

namespace malgpro {

/// splitmix64 finalizer; mixes a 64-bit word.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Seed of substream `index` under `parent`. Used for (iteration, path) splitting.
std::uint64_t substream_seed(std::uint64_t parent, std::uint64_t index) noexcept;

/// Generator for one substream.
std::mt19937_64 make_stream(std::uint64_t parent, std::uint64_t index);

/// Lower-triangular L with L L^T = covariance. Accepts PSD (including singular)
/// matrices; throws FactorizationError for non-symmetric or indefinite input.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& covariance);

/// Wiener increments of one path: d x steps, column j ~ N(0, Q dt).
/// `factor` is covariance_factor(Q).
Eigen::MatrixXd sample_path_increments(const TimeGrid& grid, const Eigen::MatrixXd& factor, std::uint64_t seed,
                                       std::uint64_t path);

/// Increments for a whole batch; element p is the d x N matrix of path p.
std::vector<Eigen::MatrixXd> sample_wiener(const TimeGrid& grid, std::size_t noise_dim,
                                           const Eigen::MatrixXd& covariance, std::size_t batch, std::uint64_t seed);

}  // namespace malgpro
