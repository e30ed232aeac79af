#include "superres/recovery.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "superres/errors.hpp"
#include "superres/numerics.hpp"

namespace superres {

Matrix build_phi(const SampleGrid& grid, const Kernel& k, const Vector& locations) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  Matrix P(m, locations.size());
  for (Eigen::Index j = 0; j < locations.size(); ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      P(i, j) = k.phi(locations[j] - grid[static_cast<std::size_t>(i)]);
    }
  }
  return P;
}

RecoveryResult recover_amplitudes(const SampleGrid& grid, const Kernel& k, const Vector& locations,
                                  const Vector& y) {
  if (y.size() != static_cast<Eigen::Index>(grid.size())) {
    throw InvalidArgument("recover_amplitudes: y has the wrong length");
  }
  if (locations.size() == 0) throw EmptySupport("recover_amplitudes: no locations");
  if (locations.size() > y.size()) {
    throw InvalidArgument("recover_amplitudes: more sources than samples");
  }

  const Matrix P = build_phi(grid, k, locations);
  const numerics::Svd d = numerics::svd(P);
  RecoveryResult r;
  r.locations = locations;
  r.sigma_max = d.S[0];
  r.sigma_min = d.S[d.S.size() - 1];
  if (!(r.sigma_min > 1e-12) || r.sigma_min < 1e-12 * r.sigma_max) {
    throw IllConditioned("design matrix is rank deficient", r.sigma_min);
  }
  r.amplitudes = d.V * (d.U.transpose() * y).cwiseQuotient(d.S);
  r.residual_norm = (P * r.amplitudes - y).norm();
  for (Eigen::Index j = 0; j < r.amplitudes.size(); ++j) {
    if (r.amplitudes[j] < 0.0) r.negative.push_back(static_cast<std::size_t>(j));
  }
  return r;
}

RecoveryResult recover(const Certificate& cert, const Vector& y, const RecoveryOptions& opts) {
  MaximizerOptions mo = opts.maximizers;
  mo.min_value = 1.0 - opts.threshold;
  const MaximizerSet mx = global_maximizers(cert, mo);
  if (mx.empty()) {
    throw EmptySupport("no certificate maximizer reaches 1 - " + std::to_string(opts.threshold));
  }
  const Vector t = Eigen::Map<const Vector>(mx.locations.data(),
                                            static_cast<Eigen::Index>(mx.size()));
  return recover_amplitudes(cert.grid(), cert.kernel(), t, y);
}

double phi_lipschitz_log10(double sigma, std::size_t m) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  const double s2 = sigma * sigma;
  return std::log10(4.0 * std::sqrt(static_cast<double>(m)) / s2) + (4.0 / s2) / std::log(10.0);
}

double phi_perturbation_bound_log10(double sigma, std::size_t m, double dt) {
  if (dt < 0.0) throw InvalidArgument("displacement norm must be non-negative");
  if (dt == 0.0) return -std::numeric_limits<double>::infinity();
  return phi_lipschitz_log10(sigma, m) + std::log10(dt);
}

void write_recovery_csv(std::ostream& os, const RecoveryResult& r) {
  const auto prec = os.precision(17);
  os << "location,amplitude\n";
  for (Eigen::Index j = 0; j < r.locations.size(); ++j) {
    os << r.locations[j] << ',' << r.amplitudes[j] << '\n';
  }
  os.precision(prec);
}

}  // namespace superres
