#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "superres/certificate.hpp"
#include "superres/model.hpp"
#include "superres/numerics.hpp"

namespace superres {

/// Exact-penalty dual: minimise Psi(lambda) = -y.lambda + Pi max(sup q - 1, 0)
/// over the box |lambda|_inf <= tau.
class PenaltyProblem {
 public:
  PenaltyProblem(MeasurementSet measurements, Kernel kernel, double Pi, double tau,
                 std::size_t scan_points = 4001);

  const MeasurementSet& measurements() const noexcept { return meas_; }
  const SampleGrid& grid() const noexcept { return meas_.grid; }
  const Vector& y() const noexcept { return meas_.y; }
  const Kernel& kernel() const noexcept { return kernel_; }
  double Pi() const noexcept { return Pi_; }
  double tau() const noexcept { return tau_; }
  std::size_t dim() const noexcept { return meas_.grid.size(); }
  const CertificateScanner& scanner() const noexcept { return *scanner_; }

  Certificate certificate(const Vector& lambda) const { return {lambda, meas_.grid, kernel_}; }

 private:
  MeasurementSet meas_;
  Kernel kernel_;
  double Pi_;
  double tau_;
  std::shared_ptr<const CertificateScanner> scanner_;
};

/// One affine minorant value + slope . (lambda - anchor).
struct Cut {
  Vector anchor;
  double value;
  Vector slope;
};

struct BundleState {
  Vector iterate;                     ///< lambda^l
  std::vector<Cut> cuts;
  double mu = std::numeric_limits<double>::infinity();   ///< best objective seen
  double nu = -std::numeric_limits<double>::infinity();  ///< model lower bound
  Vector best;                        ///< argmin of mu
  std::vector<double> mu_history;
  std::vector<double> nu_history;
  std::vector<double> gap_history;
  std::vector<double> level_history;
  /// lambda^(p) for p = 0..iterations when recording was requested.
  std::vector<Vector> iterate_history;
  int iterations = 0;
  bool converged = false;
};

double psi(const PenaltyProblem& p, const Vector& lambda);

struct Subgradient {
  Vector g;
  std::optional<double> t_active;
  double sup_value;
  double psi_value;
};

/// One subgradient of Psi at lambda, using the single strict argmax of q.
Subgradient subgradient(const PenaltyProblem& p, const Vector& lambda);

/// Polyhedral model stored as slopes and offsets (value - slope . anchor).
class CutModel {
 public:
  explicit CutModel(Eigen::Index dim);
  explicit CutModel(const std::vector<Cut>& cuts);

  void add(const Cut& cut);
  Eigen::Index size() const noexcept { return n_; }
  Eigen::Index dim() const noexcept { return slopes_.cols(); }

  double value(const Vector& lambda) const;

  struct Min {
    double nu;
    Vector argmin;
  };
  Min minimize(double tau);

  /// Projection of `point` onto {model <= level} within the box.
  Vector project(double level, const Vector& point, double tau) const;

 private:
  Matrix slopes_;
  Vector offsets_;
  Eigen::Index n_ = 0;
  numerics::LpWarmStart warm_;
};

CutModel::Min model_min(const std::vector<Cut>& cuts, double tau);
double model_value(const std::vector<Cut>& cuts, const Vector& lambda);
Vector level_project(const std::vector<Cut>& cuts, double level, const Vector& point, double tau);

struct SolveOptions {
  double alpha = 0.25;
  int max_iters = 500;
  bool record_iterates = false;
  double gap_tol = 1e-12;
};

/// Level bundle method from lambda^0 = 0.
BundleState solve(const PenaltyProblem& p, const SolveOptions& opts);
BundleState solve(const PenaltyProblem& p, double alpha, int max_iters, bool record_iterates);

/// iter, mu, nu, gap[, lambda_1..lambda_m]
void write_convergence_csv(std::ostream& os, const BundleState& s, bool with_iterates = false);

}  // namespace superres
