#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "superres/certificate.hpp"
#include "superres/kernel.hpp"
#include "superres/model.hpp"

namespace superres {

// Perturbation radii and constants for a dual certificate q = lambda* . Phi.
// q2 is q''(t*) at a source and must be negative; lambda_norm is ||lambda*||_2.

/// Radius in lambda for which t(lambda) stays a strict local maximum.
double radius_delta0(double q2, double sigma, std::size_t m, double lambda_norm);

/// Radius in lambda for the Lipschitz bound on |t - t*|, closed form.
double radius_delta_lambda(double q2, double sigma, std::size_t m, double lambda_norm);

/// Same radius built as sigma sqrt(e) |q''| / (2 sqrt(2m)) * delta0.
double radius_delta_lambda_composed(double q2, double sigma, std::size_t m, double lambda_norm);

/// |t - t*| <= C_t ||lambda - lambda*||. Canonical form.
double constant_Ct(double q2, double sigma, std::size_t m, double lambda_norm);

/// (1 / (4 + cR)) [1 + 2 sqrt(2m) (2 + cR) / (|q''| sqrt(e))], R = ||lambda*|| / sigma.
/// Differs from constant_Ct by a factor 1/sigma in the first term.
double constant_Ct_alt(double q2, double sigma, std::size_t m, double lambda_norm);

struct LogValue {
  double log10;
  std::optional<double> value;  ///< present when log10 < 300
};

/// ||a - a*|| <= C_a ||t - t*||, C_a = 4 e^{4/sigma^2} sqrt(m) ||a*|| / (sigma^2 sigma_min(Phi)).
LogValue constant_Ca(double sigma, std::size_t m, double a_norm, double sigma_min_phi);

/// Largest ||t - t*|| for which the perturbed design matrix keeps full rank.
double t_condition_radius_log10(double sigma, std::size_t m, double sigma_max, double sigma_min);
double t_condition_radius(double sigma, std::size_t m, double sigma_max, double sigma_min);

struct Jacobian {
  Matrix J;                               ///< 2k x 2k, [J_lambda | J_nu]
  std::vector<std::size_t> selected;      ///< 2k sample rows, ascending
  std::vector<std::size_t> kept_lambda;   ///< k columns of lambda, ascending
};

/// Two nearest samples per source (next-nearest on collision), nearest one
/// kept as a free lambda entry. q'' comes from the certificate at the source.
Jacobian assemble_jacobian(const SourceModel& src, const SampleGrid& grid, const Kernel& k,
                           const Certificate& cert);

/// Variant for explicit row and column choices.
Matrix jacobian_from_selection(const SourceModel& src, const SampleGrid& grid, const Kernel& k,
                               const Certificate& cert, const std::vector<std::size_t>& rows,
                               const std::vector<std::size_t>& cols);

struct NoiseConstants {
  double C_lambda;
  double delta_w;
};

/// C_lambda = 2 / sigma_min(J), delta_w = sigma_min(J)^2 / (4 P).
NoiseConstants constant_Clambda_and_deltaw(const Matrix& J, double P);
NoiseConstants constant_Clambda_and_deltaw_from_sigma(double sigma_min_J, double P);

enum class PVariant {
  theorem,  ///< as stated with the noise theorem
  lemma,    ///< Jacobian-perturbation lemma: +2 C_t over sigma^2, no sqrt(2/e) C_t over sigma
};

double constant_P(std::size_t k, std::size_t m, double sigma, double Pi, double tau, double Ct,
                  double Delta2, PVariant variant = PVariant::theorem);

/// Throws RadiusTooLarge when sigma^2 B' <= 2 sqrt(m) delta_lambda.
double constant_Delta2(std::size_t k, std::size_t m, double sigma, double Ct,
                       double lambda_star_norm, double delta_lambda, double B_lower);

/// |q''| [1 - c ||lambda*|| / (4 sigma + 2 c ||lambda*||)].
double B_lower_bound(double q2, double sigma, double lambda_norm);

struct SourceBounds {
  double location;
  double q2;
  std::optional<double> delta0;
  std::optional<double> delta_lambda;
  std::optional<double> Ct;
  std::optional<double> Ct_alt;
  std::optional<double> Ct_ratio;  ///< Ct / Ct_alt
  std::optional<double> B_lower;
  std::optional<double> Delta2;
};

struct BoundsReport {
  std::vector<SourceBounds> sources;
  double lambda_norm = 0.0;
  double R = 0.0;
  double sigma_max_phi = 0.0;
  double sigma_min_phi = 0.0;
  std::optional<LogValue> Ca;
  std::optional<double> t_radius_log10;
  std::vector<std::size_t> selected;
  std::vector<std::size_t> kept_lambda;
  std::optional<Matrix> J;
  std::optional<double> sigma_min_J;
  std::optional<double> Ct_max;
  std::optional<double> Delta2_max;
  std::optional<double> P;
  std::optional<double> C_lambda;
  std::optional<double> delta_w;
  /// Field name -> reason, for every field that could not be evaluated.
  std::map<std::string, std::string> errors;
};

struct ReportOptions {
  PVariant p_variant = PVariant::theorem;
  /// Replace the sample-selection rule; used to probe degenerate layouts.
  std::optional<std::vector<std::size_t>> selected_override;
  std::optional<std::vector<std::size_t>> kept_override;
};

/// Every constant above for one reference solution. Individual failures are
/// recorded in `errors` and leave the field empty.
BoundsReport full_report(const SourceModel& src, const SampleGrid& grid, const Kernel& k,
                         const Vector& lambda_star, double Pi, double tau,
                         const ReportOptions& opts = {});

/// key=value lines; log-space fields end in _log10, failures are written as
/// `key=error: reason`.
void write_report(std::ostream& os, const BoundsReport& r);

/// Header line and one row with the scalar fields.
void write_report_csv(std::ostream& os, const BoundsReport& r);

}  // namespace superres
