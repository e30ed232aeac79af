#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "superres/certificate.hpp"
#include "superres/kernel.hpp"
#include "superres/model.hpp"

namespace superres {

struct RecoveryResult {
  Vector locations;
  Vector amplitudes;
  double residual_norm = 0.0;
  double sigma_max = 0.0;  ///< of the m x k design matrix
  double sigma_min = 0.0;
  /// Indices with a negative amplitude. Reported, never clipped.
  std::vector<std::size_t> negative;
};

/// Design matrix with entry (i, j) = phi(t_j - s_i).
Matrix build_phi(const SampleGrid& grid, const Kernel& k, const Vector& locations);

/// Unconstrained least squares min ||Phi a - y||. Throws IllConditioned when
/// Phi is numerically rank deficient.
RecoveryResult recover_amplitudes(const SampleGrid& grid, const Kernel& k, const Vector& locations,
                                  const Vector& y);

struct RecoveryOptions {
  double threshold = 1e-3;  ///< keep maximizers with q >= 1 - threshold
  MaximizerOptions maximizers;
};

/// Support from the certificate maximizers, amplitudes by least squares.
/// Throws EmptySupport when no maximizer reaches 1 - threshold.
RecoveryResult recover(const Certificate& cert, const Vector& y, const RecoveryOptions& opts = {});

/// log10 of 4 exp(4 / sigma^2) sqrt(m) / sigma^2, the Lipschitz constant of
/// t -> Phi(t) in Frobenius norm.
double phi_lipschitz_log10(double sigma, std::size_t m);

/// log10 of the bound on ||Phi(t1) - Phi(t0)||_F for a displacement of
/// Euclidean norm dt. -inf when dt == 0.
double phi_perturbation_bound_log10(double sigma, std::size_t m, double dt);

/// location,amplitude rows with header.
void write_recovery_csv(std::ostream& os, const RecoveryResult& r);

}  // namespace superres
