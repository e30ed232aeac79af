#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "superres/kernel.hpp"

namespace superres {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Non-negative spike train x = sum_i a_i delta_{t_i} on [0, 1].
class SourceModel {
 public:
  /// Locations strictly increasing in [0, 1]; amplitudes positive.
  SourceModel(std::vector<double> locations, std::vector<double> amplitudes);

  std::size_t size() const noexcept { return locations_.size(); }
  const std::vector<double>& locations() const noexcept { return locations_; }
  const std::vector<double>& amplitudes() const noexcept { return amplitudes_; }

  Vector location_vector() const;
  Vector amplitude_vector() const;

 private:
  std::vector<double> locations_;
  std::vector<double> amplitudes_;
};

/// Strictly increasing sample positions s_1 < ... < s_m in [0, 1].
class SampleGrid {
 public:
  explicit SampleGrid(std::vector<double> samples);

  /// s_j = (j - 1) / (m - 1), both endpoints included. m == 1 gives {0.5}.
  static SampleGrid equispaced(std::size_t m);

  std::size_t size() const noexcept { return samples_.size(); }
  double operator[](std::size_t j) const { return samples_[j]; }
  const std::vector<double>& samples() const noexcept { return samples_; }

 private:
  std::vector<double> samples_;
};

struct MeasurementSet {
  Vector y;  ///< observations, noise included
  Vector w;  ///< noise actually added (zero when clean)
  SampleGrid grid;
};

/// Phi(t) = [phi(t - s_1), ..., phi(t - s_m)].
Vector feature_vector(const SampleGrid& grid, const Kernel& k, double t);

/// y = sum_i a_i Phi(t_i) + w.
MeasurementSet synthesize(const SourceModel& src, const SampleGrid& grid, const Kernel& k,
                          const std::optional<Vector>& noise = std::nullopt);

/// w_j = w_c * X_j with X_j iid uniform on [0, 1). The draw is a fixed function
/// of the seed on every platform (mt19937_64, top 53 bits).
Vector uniform_noise(std::size_t m, double w_c, std::uint64_t seed);

/// The 33 noise magnitudes of the sweep, ascending from 2e-6 to 0.1.
std::vector<double> noise_grid();

}  // namespace superres
