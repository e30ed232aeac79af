#include "superres/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "superres/errors.hpp"

namespace superres {

namespace {

void require_increasing_unit(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
      throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
    }
    if (i > 0 && !(v[i] > v[i - 1])) {
      throw InvalidArgument(std::string(what) + " must be strictly increasing");
    }
  }
}

}  // namespace

SourceModel::SourceModel(std::vector<double> locations, std::vector<double> amplitudes)
    : locations_(std::move(locations)), amplitudes_(std::move(amplitudes)) {
  if (locations_.empty()) throw InvalidArgument("source model needs at least one source");
  if (locations_.size() != amplitudes_.size()) {
    throw InvalidArgument("source locations and amplitudes differ in length");
  }
  require_increasing_unit(locations_, "source locations");
  for (double a : amplitudes_) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("amplitudes must be positive");
  }
}

Vector SourceModel::location_vector() const {
  return Eigen::Map<const Vector>(locations_.data(), static_cast<Eigen::Index>(size()));
}

Vector SourceModel::amplitude_vector() const {
  return Eigen::Map<const Vector>(amplitudes_.data(), static_cast<Eigen::Index>(size()));
}

SampleGrid::SampleGrid(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw InvalidArgument("sample grid needs at least one sample");
  require_increasing_unit(samples_, "samples");
}

SampleGrid SampleGrid::equispaced(std::size_t m) {
  if (m == 0) throw InvalidArgument("sample count must be positive");
  if (m == 1) return SampleGrid({0.5});
  std::vector<double> s(m);
  for (std::size_t j = 0; j < m; ++j) {
    s[j] = static_cast<double>(j) / static_cast<double>(m - 1);
  }
  return SampleGrid(std::move(s));
}

Vector feature_vector(const SampleGrid& grid, const Kernel& k, double t) {
  Vector f(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) f[static_cast<Eigen::Index>(j)] = k.phi(t - grid[j]);
  return f;
}

MeasurementSet synthesize(const SourceModel& src, const SampleGrid& grid, const Kernel& k,
                          const std::optional<Vector>& noise) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (noise && noise->size() != m) {
    throw InvalidArgument("noise length " + std::to_string(noise->size()) +
                          " does not match sample count " + std::to_string(m));
  }
  Vector y = Vector::Zero(m);
  for (std::size_t i = 0; i < src.size(); ++i) {
    y += src.amplitudes()[i] * feature_vector(grid, k, src.locations()[i]);
  }
  Vector w = noise ? *noise : Vector::Zero(m);
  y += w;
  return {std::move(y), std::move(w), grid};
}

Vector uniform_noise(std::size_t m, double w_c, std::uint64_t seed) {
  if (!(w_c >= 0.0)) throw InvalidArgument("noise magnitude must be non-negative");
  std::mt19937_64 rng(seed);
  Vector w(static_cast<Eigen::Index>(m));
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const double x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    w[j] = w_c * x;
  }
  return w;
}

std::vector<double> noise_grid() {
  std::vector<double> out;
  // {2,4,6,8,10} x 1e-6 .. 1e-4, then {2,...,10} x 1e-3 .. 1e-2. Dividing
  // by the exact power of ten gives the correctly rounded decimal literal.
  for (double inv_scale : {1e6, 1e5, 1e4}) {
    for (int v = 2; v <= 10; v += 2) out.push_back(v / inv_scale);
  }
  for (double inv_scale : {1e3, 1e2}) {
    for (int v = 2; v <= 10; ++v) out.push_back(v / inv_scale);
  }
  return out;
}

}  // namespace superres
