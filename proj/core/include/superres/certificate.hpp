#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "superres/kernel.hpp"
#include "superres/model.hpp"

namespace superres {

/// Dual certificate q(t) = sum_j lambda_j phi(t - s_j).
class Certificate {
 public:
  Certificate(Vector lambda, SampleGrid grid, Kernel kernel);

  const Vector& lambda() const noexcept { return lambda_; }
  const SampleGrid& grid() const noexcept { return grid_; }
  const Kernel& kernel() const noexcept { return kernel_; }

  /// q^(order)(t) for order 0..3.
  double eval(double t, int order = 0) const;

  struct Local {
    double q;
    double d1;
    double d2;
    double d1_scale;  ///< sum_j |lambda_j phi'(t - s_j)|, the rounding scale of d1
  };
  /// q, q', q'' in one pass over the samples.
  Local local(double t) const noexcept;

 private:
  Vector lambda_;
  SampleGrid grid_;
  Kernel kernel_;
};

double q_eval(const Certificate& c, double t, int order);

/// Uniform scan grid over [0, 1] with the kernel translates cached, so
/// evaluating q on every scan point is one matrix-vector product.
class CertificateScanner {
 public:
  CertificateScanner(const SampleGrid& grid, const Kernel& k, std::size_t points = 4001);

  std::size_t points() const noexcept { return static_cast<std::size_t>(features_.rows()); }
  double step() const noexcept { return step_; }
  double position(std::size_t i) const noexcept { return static_cast<double>(i) * step_; }
  Vector scan(const Vector& lambda) const { return features_ * lambda; }

 private:
  Matrix features_;
  double step_;
};

struct MaximizerSet {
  std::vector<double> locations;
  std::vector<double> values;
  std::vector<double> curvatures;

  std::size_t size() const noexcept { return locations.size(); }
  bool empty() const noexcept { return locations.empty(); }
};

struct MaximizerOptions {
  std::size_t grid_points = 4001;
  double merge_tol = 1e-4;
  /// Keep maxima within this of the supremum; default 1e-3 (sup - inf).
  std::optional<double> value_tol;
  /// Keep only maxima with q >= this, on top of value_tol.
  std::optional<double> min_value;
};

/// Stationary interior local maxima of q near its supremum over [0, 1],
/// refined by safeguarded Newton, merged and sorted. Maxima sitting on the
/// boundary with non-zero slope are left out; sup_q reports those.
MaximizerSet global_maximizers(const Certificate& c, const MaximizerOptions& opts = {});
MaximizerSet global_maximizers(const Certificate& c, std::size_t grid_points, double merge_tol);
MaximizerSet global_maximizers(const Certificate& c, const CertificateScanner& scanner,
                               const MaximizerOptions& opts);

struct SupResult {
  double t;
  double value;
};

/// Global supremum of q over [0, 1]; ties go to the smallest t.
SupResult sup_q(const Certificate& c);
SupResult sup_q(const Certificate& c, const CertificateScanner& scanner);

struct CertificateReport {
  std::vector<double> source_errors;  ///< |q(t_i) - 1|
  double away_sup = 0.0;              ///< sup of q outside merge_tol of every source
  bool pass = false;
};

CertificateReport validate_certificate(const Certificate& c, const SourceModel& src, double tol,
                                       double merge_tol = 1e-4);

/// Stationary point of q reached by safeguarded Newton from t0 inside
/// [t0 - sigma, t0 + sigma]. Throws NoConvergence.
double refine_location(const Certificate& c, double t0, int max_iters = 50);

/// (t, q(t)) on a uniform grid, with header row.
void write_certificate_csv(std::ostream& os, const Certificate& c, std::size_t points = 4001);

}  // namespace superres
