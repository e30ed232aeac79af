#include "superres/kernel.hpp"

#include <cmath>
#include <string>

#include "superres/errors.hpp"

namespace superres {

Kernel::Kernel(double sigma) : sigma_(sigma), inv_s2_(0.0) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("kernel width must be positive and finite, got " +
                          std::to_string(sigma));
  }
  inv_s2_ = 1.0 / (sigma * sigma);
}

double Kernel::phi(double t) const noexcept { return std::exp(-t * t * inv_s2_); }

double Kernel::d1(double t) const noexcept { return -2.0 * t * inv_s2_ * phi(t); }

double Kernel::d2(double t) const noexcept {
  const double u = t * t * inv_s2_;
  return (4.0 * u - 2.0) * inv_s2_ * phi(t);
}

double Kernel::d3(double t) const noexcept {
  const double u = t * t * inv_s2_;
  return (12.0 - 8.0 * u) * t * inv_s2_ * inv_s2_ * phi(t);
}

double Kernel::deriv(double t, int order) const {
  switch (order) {
    case 1: return d1(t);
    case 2: return d2(t);
    case 3: return d3(t);
    default:
      throw InvalidArgument("unsupported derivative order " + std::to_string(order));
  }
}

double third_deriv_constant() {
  static const double c = [] {
    const double r6 = std::sqrt(6.0);
    return 4.0 * std::sqrt(9.0 - 3.0 * r6) * std::exp(-(3.0 - r6) / 2.0);
  }();
  return c;
}

double curvature_perturbation_constant() {
  static const double c2 = 4.0 + third_deriv_constant() * std::sqrt(2.0 / std::exp(1.0));
  return c2;
}

DerivBounds deriv_sup_bounds(const Kernel& k) {
  const double s = k.sigma();
  return {std::sqrt(2.0) / (s * std::sqrt(std::exp(1.0))), 2.0 / (s * s),
          third_deriv_constant() / (s * s * s)};
}

}  // namespace superres
