#include "malgpro/random.hpp"

#include <cmath>

#include "malgpro/errors.hpp"

namespace malgpro {

std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t substream_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

std::mt19937_64 make_stream(std::uint64_t parent, std::uint64_t index) {
  return std::mt19937_64(substream_seed(parent, index));
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& covariance) {
  const Eigen::Index d = covariance.rows();
  if (covariance.cols() != d) throw FactorizationError("covariance must be square");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw FactorizationError("covariance must be symmetric");

  // Cholesky that tolerates zero pivots, so singular PSD matrices (Q = 0) factor.
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  const double tol = 1e-12 * scale;
  for (Eigen::Index j = 0; j < d; ++j) {
    double pivot = covariance(j, j) - l.row(j).head(j).squaredNorm();
    if (pivot < -tol) throw FactorizationError("covariance is not positive semidefinite");
    if (pivot <= tol) {
      for (Eigen::Index i = j + 1; i < d; ++i) {
        const double off = covariance(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
        if (std::abs(off) > std::sqrt(tol)) throw FactorizationError("covariance is not positive semidefinite");
      }
      continue;
    }
    l(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < d; ++i)
      l(i, j) = (covariance(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
  }
  return l;
}

Eigen::MatrixXd sample_path_increments(const TimeGrid& grid, const Eigen::MatrixXd& factor, std::uint64_t seed,
                                       std::uint64_t path) {
  const Eigen::Index d = factor.rows();
  const auto steps = static_cast<Eigen::Index>(grid.steps());
  auto rng = make_stream(seed, path);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd standard(d, steps);
  for (Eigen::Index j = 0; j < steps; ++j)
    for (Eigen::Index l = 0; l < d; ++l) standard(l, j) = normal(rng);
  return std::sqrt(grid.dt()) * (factor * standard);
}

std::vector<Eigen::MatrixXd> sample_wiener(const TimeGrid& grid, std::size_t noise_dim,
                                           const Eigen::MatrixXd& covariance, std::size_t batch, std::uint64_t seed) {
  if (static_cast<std::size_t>(covariance.rows()) != noise_dim)
    throw InvalidArgument("sample_wiener: covariance must be noise_dim x noise_dim");
  const Eigen::MatrixXd factor = covariance_factor(covariance);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(batch);
  for (std::size_t p = 0; p < batch; ++p) out.push_back(sample_path_increments(grid, factor, seed, p));
  return out;
}

}  // namespace malgpro
