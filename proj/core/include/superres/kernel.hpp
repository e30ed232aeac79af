#pragma once

namespace superres {

/// Gaussian convolution kernel phi(t) = exp(-t^2 / sigma^2).
class Kernel {
 public:
  explicit Kernel(double sigma);

  double sigma() const noexcept { return sigma_; }

  double phi(double t) const noexcept;

  /// Exact derivative of order 1, 2 or 3. Throws InvalidArgument otherwise.
  double deriv(double t, int order) const;

  // Unchecked closed forms, used in inner loops.
  double d1(double t) const noexcept;
  double d2(double t) const noexcept;
  double d3(double t) const noexcept;

 private:
  double sigma_;
  double inv_s2_;
};

/// sup_t |phi^(n)(t)| for n = 1, 2, 3.
struct DerivBounds {
  double m1;
  double m2;
  double m3;
};

DerivBounds deriv_sup_bounds(const Kernel& k);

/// 4 sqrt(9 - 3 sqrt 6) exp(-(3 - sqrt 6) / 2), the scale-free sup of |phi'''|.
double third_deriv_constant();

/// 4 + c sqrt(2 / e).
double curvature_perturbation_constant();

// Free-function spellings.
inline double phi(const Kernel& k, double t) { return k.phi(t); }
inline double phi_deriv(const Kernel& k, double t, int order) { return k.deriv(t, order); }

}  // namespace superres
