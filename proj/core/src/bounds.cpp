#include "superres/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "superres/errors.hpp"
#include "superres/numerics.hpp"
#include "superres/recovery.hpp"

namespace superres {

namespace {

const double kSqrtE = std::sqrt(std::numbers::e);

void check_curvature(double q2) {
  if (!(q2 < 0.0)) throw InvalidCurvature("q'' must be negative at a source", q2);
}

void check_common(double q2, double sigma, std::size_t m, double lambda_norm) {
  check_curvature(q2);
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (m == 0) throw InvalidArgument("m must be positive");
  if (!(lambda_norm >= 0.0)) throw InvalidArgument("lambda norm must be non-negative");
}

}  // namespace

double radius_delta0(double q2, double sigma, std::size_t m, double lambda_norm) {
  check_common(q2, sigma, m, lambda_norm);
  const double c = third_deriv_constant();
  return sigma * sigma * std::abs(q2) /
         (std::sqrt(static_cast<double>(m)) * (4.0 + 2.0 * c * lambda_norm / sigma));
}

double radius_delta_lambda(double q2, double sigma, std::size_t m, double lambda_norm) {
  check_common(q2, sigma, m, lambda_norm);
  const double c = third_deriv_constant();
  const double R = lambda_norm / sigma;
  return q2 * q2 * sigma * sigma * sigma * kSqrtE /
         (4.0 * std::numbers::sqrt2 * (2.0 + c * R) * static_cast<double>(m));
}

double radius_delta_lambda_composed(double q2, double sigma, std::size_t m, double lambda_norm) {
  const double d0 = radius_delta0(q2, sigma, m, lambda_norm);
  return sigma * kSqrtE * std::abs(q2) / (2.0 * std::sqrt(2.0 * static_cast<double>(m))) * d0;
}

double constant_Ct(double q2, double sigma, std::size_t m, double lambda_norm) {
  check_common(q2, sigma, m, lambda_norm);
  const double c = third_deriv_constant();
  const double cl = c * lambda_norm;
  return 2.0 * std::sqrt(2.0 * static_cast<double>(m)) * (2.0 * sigma + cl) /
             (std::abs(q2) * sigma * kSqrtE * (4.0 * sigma + cl)) +
         2.0 * sigma / (4.0 * sigma + cl);
}

double constant_Ct_alt(double q2, double sigma, std::size_t m, double lambda_norm) {
  check_common(q2, sigma, m, lambda_norm);
  const double cR = third_deriv_constant() * lambda_norm / sigma;
  return (1.0 + 2.0 * std::sqrt(2.0 * static_cast<double>(m)) * (2.0 + cR) /
                    (std::abs(q2) * kSqrtE)) /
         (4.0 + cR);
}

LogValue constant_Ca(double sigma, std::size_t m, double a_norm, double sigma_min_phi) {
  if (!(sigma_min_phi > 0.0)) throw IllConditioned("sigma_min(Phi) must be positive", sigma_min_phi);
  if (!(a_norm >= 0.0)) throw InvalidArgument("amplitude norm must be non-negative");
  LogValue out;
  out.log10 = phi_lipschitz_log10(sigma, m) + std::log10(a_norm / sigma_min_phi);
  if (out.log10 < 300.0) out.value = std::pow(10.0, out.log10);
  return out;
}

double t_condition_radius_log10(double sigma, std::size_t m, double sigma_max, double sigma_min) {
  if (!(sigma_min > 0.0) || sigma_max < sigma_min) {
    throw InvalidArgument("need sigma_max >= sigma_min > 0");
  }
  const double r2 = (sigma_min / sigma_max) * (sigma_min / sigma_max);
  // sqrt(1 + r^2) - 1 without cancellation.
  const double bracket = r2 / (std::sqrt(1.0 + r2) + 1.0);
  return std::log10(sigma_max * bracket) - phi_lipschitz_log10(sigma, m);
}

double t_condition_radius(double sigma, std::size_t m, double sigma_max, double sigma_min) {
  return std::pow(10.0, t_condition_radius_log10(sigma, m, sigma_max, sigma_min));
}

Matrix jacobian_from_selection(const SourceModel& src, const SampleGrid& grid, const Kernel& k,
                               const Certificate& cert, const std::vector<std::size_t>& rows,
                               const std::vector<std::size_t>& cols) {
  const std::size_t ns = src.size();
  if (cols.size() != ns) throw InvalidArgument("need one kept lambda entry per source");
  for (auto r : rows) {
    if (r >= grid.size()) throw InvalidArgument("sample index out of range");
  }
  for (auto c : cols) {
    if (c >= grid.size()) throw InvalidArgument("sample index out of range");
  }

  const auto& t = src.locations();
  const auto& a = src.amplitudes();
  std::vector<double> q2(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    q2[i] = cert.eval(t[i], 2);
    check_curvature(q2[i]);
  }

  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(ns);
  Matrix J(nr, 2 * nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    const double sj = grid[rows[static_cast<std::size_t>(r)]];
    for (Eigen::Index l = 0; l < nc; ++l) {
      const double sl = grid[cols[static_cast<std::size_t>(l)]];
      double acc = 0.0;
      for (std::size_t i = 0; i < ns; ++i) {
        acc += a[i] * k.d1(t[i] - sj) * k.d1(t[i] - sl) / q2[i];
      }
      J(r, l) = acc;
      J(r, nc + l) = -k.phi(t[static_cast<std::size_t>(l)] - sj);
    }
  }
  return J;
}

Jacobian assemble_jacobian(const SourceModel& src, const SampleGrid& grid, const Kernel& k,
                           const Certificate& cert) {
  const std::size_t ns = src.size();
  const std::size_t m = grid.size();
  if (m < 2 * ns) throw InsufficientSamples("need at least two samples per source");

  Jacobian out;
  std::vector<char> used(m, 0);
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < ns; ++i) {
    const double ti = src.locations()[i];
    for (std::size_t j = 0; j < m; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return std::abs(grid[x] - ti) < std::abs(grid[y] - ti);
    });
    int taken = 0;
    for (std::size_t j : order) {
      if (used[j]) continue;
      used[j] = 1;
      out.selected.push_back(j);
      if (taken == 0) out.kept_lambda.push_back(j);
      if (++taken == 2) break;
    }
    if (taken < 2) throw InsufficientSamples("ran out of samples while deduplicating");
  }
  std::sort(out.selected.begin(), out.selected.end());
  std::sort(out.kept_lambda.begin(), out.kept_lambda.end());
  out.J = jacobian_from_selection(src, grid, k, cert, out.selected, out.kept_lambda);
  return out;
}

NoiseConstants constant_Clambda_and_deltaw_from_sigma(double sigma_min_J, double P) {
  if (!(sigma_min_J > 0.0)) throw NotInvertible("J* is singular", sigma_min_J);
  if (!(P > 0.0)) throw InvalidArgument("P must be positive");
  return {2.0 / sigma_min_J, sigma_min_J * sigma_min_J / (4.0 * P)};
}

NoiseConstants constant_Clambda_and_deltaw(const Matrix& J, double P) {
  if (J.rows() != J.cols()) throw InvalidArgument("J* must be square");
  const double s = numerics::sigma_min(J);
  const double smax = numerics::sigma_max(J);
  if (!(s > 1e-14 * smax)) throw NotInvertible("J* is numerically singular", s);
  return constant_Clambda_and_deltaw_from_sigma(s, P);
}

double constant_P(std::size_t k, std::size_t /*m*/, double sigma, double Pi, double tau, double Ct,
                  double Delta2, PVariant variant) {
  if (k == 0 || !(sigma > 0.0) || !(Pi > 0.0) || !(tau > 0.0) || !(Ct > 0.0) || !(Delta2 >= 0.0)) {
    throw InvalidArgument("constant_P needs positive inputs");
  }
  const double kd = static_cast<double>(k);
  const double sk = std::sqrt(kd);
  const double s2k = std::sqrt(2.0 * kd);

  double inv_s2 = 2.0 * sk * Ct * Ct * Pi + 4.0 * kd * Ct * Delta2 * tau * Pi;
  double inv_s = s2k * Ct / kSqrtE + 4.0 * sk * Ct * Ct * Pi +
                 2.0 * std::numbers::sqrt2 * Delta2 * Pi / kSqrtE +
                 8.0 * kd * Ct * Delta2 * tau * Pi + s2k * Delta2 * Pi / kSqrtE;
  if (variant == PVariant::theorem) {
    inv_s += std::sqrt(2.0 / std::numbers::e) * Ct;
  } else {
    inv_s2 += 2.0 * Ct;
  }
  return std::numbers::sqrt2 * kd * (inv_s2 / (sigma * sigma) + inv_s / sigma);
}

double constant_Delta2(std::size_t k, std::size_t m, double sigma, double Ct,
                       double lambda_star_norm, double delta_lambda, double B_lower) {
  const double c2 = curvature_perturbation_constant();
  const double sm = std::sqrt(static_cast<double>(m));
  const double den = sigma * sigma * B_lower - 2.0 * sm * delta_lambda;
  if (!(den > 0.0)) {
    throw RadiusTooLarge("sigma^2 B' - 2 sqrt(m) delta_lambda is not positive", den);
  }
  const double num = (c2 * Ct * sm * (lambda_star_norm + delta_lambda) +
                      2.0 * std::numbers::sqrt2 / kSqrtE * sigma) *
                     std::sqrt(static_cast<double>(k));
  return num / (den * den);
}

double B_lower_bound(double q2, double sigma, double lambda_norm) {
  check_curvature(q2);
  const double cl = third_deriv_constant() * lambda_norm;
  return std::abs(q2) * (1.0 - cl / (4.0 * sigma + 2.0 * cl));
}

BoundsReport full_report(const SourceModel& src, const SampleGrid& grid, const Kernel& k,
                         const Vector& lambda_star, double Pi, double tau,
                         const ReportOptions& opts) {
  BoundsReport r;
  const double sigma = k.sigma();
  const std::size_t m = grid.size();
  const Certificate cert(lambda_star, grid, k);
  r.lambda_norm = lambda_star.norm();
  r.R = r.lambda_norm / sigma;

  auto attempt = [&](const std::string& key, auto&& fn) {
    try {
      fn();
      return true;
    } catch (const std::exception& e) {
      r.errors[key] = e.what();
      return false;
    }
  };

  for (std::size_t i = 0; i < src.size(); ++i) {
    SourceBounds sb;
    sb.location = src.locations()[i];
    sb.q2 = cert.eval(sb.location, 2);
    const std::string sfx = "_" + std::to_string(i);
    attempt("delta0" + sfx, [&] { sb.delta0 = radius_delta0(sb.q2, sigma, m, r.lambda_norm); });
    attempt("delta_lambda" + sfx,
            [&] { sb.delta_lambda = radius_delta_lambda(sb.q2, sigma, m, r.lambda_norm); });
    attempt("Ct" + sfx, [&] {
      sb.Ct = constant_Ct(sb.q2, sigma, m, r.lambda_norm);
      sb.Ct_alt = constant_Ct_alt(sb.q2, sigma, m, r.lambda_norm);
      sb.Ct_ratio = *sb.Ct / *sb.Ct_alt;
    });
    attempt("B_lower" + sfx, [&] { sb.B_lower = B_lower_bound(sb.q2, sigma, r.lambda_norm); });
    if (sb.Ct && sb.delta_lambda && sb.B_lower) {
      attempt("Delta2" + sfx, [&] {
        sb.Delta2 = constant_Delta2(src.size(), m, sigma, *sb.Ct, r.lambda_norm, *sb.delta_lambda,
                                    *sb.B_lower);
      });
    } else {
      r.errors["Delta2" + sfx] = "missing inputs";
    }
    r.sources.push_back(sb);
  }

  const Matrix Phi = build_phi(grid, k, src.location_vector());
  const numerics::Svd d = numerics::svd(Phi);
  r.sigma_max_phi = d.S[0];
  r.sigma_min_phi = d.S[d.S.size() - 1];
  attempt("Ca", [&] {
    r.Ca = constant_Ca(sigma, m, src.amplitude_vector().norm(), r.sigma_min_phi);
  });
  attempt("t_radius", [&] {
    r.t_radius_log10 = t_condition_radius_log10(sigma, m, r.sigma_max_phi, r.sigma_min_phi);
  });

  attempt("J", [&] {
    if (opts.selected_override || opts.kept_override) {
      Jacobian base;
      if (!opts.selected_override || !opts.kept_override) base = assemble_jacobian(src, grid, k, cert);
      r.selected = opts.selected_override.value_or(base.selected);
      r.kept_lambda = opts.kept_override.value_or(base.kept_lambda);
      r.J = jacobian_from_selection(src, grid, k, cert, r.selected, r.kept_lambda);
    } else {
      Jacobian jac = assemble_jacobian(src, grid, k, cert);
      r.selected = std::move(jac.selected);
      r.kept_lambda = std::move(jac.kept_lambda);
      r.J = std::move(jac.J);
    }
  });
  if (r.J) {
    attempt("sigma_min_J", [&] {
      const double s = numerics::sigma_min(*r.J);
      if (!(s > 1e-14 * numerics::sigma_max(*r.J))) throw NotInvertible("J* is numerically singular", s);
      r.sigma_min_J = s;
    });
  }

  double ct_max = -std::numeric_limits<double>::infinity();
  double d2_max = -std::numeric_limits<double>::infinity();
  bool complete = true;
  for (const auto& sb : r.sources) {
    if (!sb.Ct || !sb.Delta2) {
      complete = false;
      continue;
    }
    ct_max = std::max(ct_max, *sb.Ct);
    d2_max = std::max(d2_max, *sb.Delta2);
  }
  if (complete && !r.sources.empty()) {
    r.Ct_max = ct_max;
    r.Delta2_max = d2_max;
    attempt("P", [&] {
      r.P = constant_P(src.size(), m, sigma, Pi, tau, ct_max, d2_max, opts.p_variant);
    });
  } else {
    r.errors["P"] = "per-source constants missing";
  }
  if (r.sigma_min_J && r.P) {
    attempt("C_lambda", [&] {
      const auto nc = constant_Clambda_and_deltaw_from_sigma(*r.sigma_min_J, *r.P);
      r.C_lambda = nc.C_lambda;
      r.delta_w = nc.delta_w;
    });
  } else {
    r.errors["C_lambda"] = r.sigma_min_J ? "P missing" : "J* not available";
  }
  return r;
}

namespace {

template <class T>
void kv(std::ostream& os, const std::string& key, const std::optional<T>& v,
        const BoundsReport& r, const std::string& err_key) {
  os << key << '=';
  if (v) {
    os << *v;
  } else {
    auto it = r.errors.find(err_key);
    os << "error: " << (it == r.errors.end() ? std::string("unavailable") : it->second);
  }
  os << '\n';
}

void index_list(std::ostream& os, const std::vector<std::size_t>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ";" : "") << v[i];
}

}  // namespace

void write_report(std::ostream& os, const BoundsReport& r) {
  const auto prec = os.precision(17);
  os << "k=" << r.sources.size() << '\n';
  os << "lambda_norm=" << r.lambda_norm << '\n';
  os << "R=" << r.R << '\n';
  for (std::size_t i = 0; i < r.sources.size(); ++i) {
    const auto& s = r.sources[i];
    const std::string sfx = "_" + std::to_string(i);
    os << "location" << sfx << '=' << s.location << '\n';
    os << "q2" << sfx << '=' << s.q2 << '\n';
    kv(os, "delta0" + sfx, s.delta0, r, "delta0" + sfx);
    kv(os, "delta_lambda" + sfx, s.delta_lambda, r, "delta_lambda" + sfx);
    kv(os, "Ct" + sfx, s.Ct, r, "Ct" + sfx);
    kv(os, "Ct_alt" + sfx, s.Ct_alt, r, "Ct" + sfx);
    kv(os, "Ct_ratio" + sfx, s.Ct_ratio, r, "Ct" + sfx);
    kv(os, "B_lower" + sfx, s.B_lower, r, "B_lower" + sfx);
    kv(os, "Delta2" + sfx, s.Delta2, r, "Delta2" + sfx);
  }
  os << "sigma_max_phi=" << r.sigma_max_phi << '\n';
  os << "sigma_min_phi=" << r.sigma_min_phi << '\n';
  kv(os, "Ca_log10", r.Ca ? std::optional<double>(r.Ca->log10) : std::nullopt, r, "Ca");
  if (r.Ca && r.Ca->value) os << "Ca=" << *r.Ca->value << '\n';
  kv(os, "t_radius_log10", r.t_radius_log10, r, "t_radius");
  os << "selected_samples=";
  index_list(os, r.selected);
  os << "\nkept_lambda=";
  index_list(os, r.kept_lambda);
  os << '\n';
  if (r.J) {
    for (Eigen::Index i = 0; i < r.J->rows(); ++i) {
      os << "J_row_" << i << '=';
      for (Eigen::Index j = 0; j < r.J->cols(); ++j) os << (j ? ";" : "") << (*r.J)(i, j);
      os << '\n';
    }
  } else {
    kv(os, "J", std::optional<double>(), r, "J");
  }
  kv(os, "sigma_min_J", r.sigma_min_J, r, "sigma_min_J");
  kv(os, "Ct_max", r.Ct_max, r, "P");
  kv(os, "Delta2_max", r.Delta2_max, r, "P");
  kv(os, "P", r.P, r, "P");
  kv(os, "C_lambda", r.C_lambda, r, "C_lambda");
  kv(os, "delta_w", r.delta_w, r, "C_lambda");
  os.precision(prec);
}

void write_report_csv(std::ostream& os, const BoundsReport& r) {
  const auto prec = os.precision(17);
  auto cell = [&](const std::optional<double>& v) {
    if (v) os << *v;
  };
  os << "k,lambda_norm,R,sigma_max_phi,sigma_min_phi,Ca_log10,t_radius_log10,sigma_min_J,"
        "Ct_max,Delta2_max,P,C_lambda,delta_w\n";
  os << r.sources.size() << ',' << r.lambda_norm << ',' << r.R << ',' << r.sigma_max_phi << ','
     << r.sigma_min_phi << ',';
  cell(r.Ca ? std::optional<double>(r.Ca->log10) : std::nullopt);
  os << ',';
  cell(r.t_radius_log10);
  os << ',';
  cell(r.sigma_min_J);
  os << ',';
  cell(r.Ct_max);
  os << ',';
  cell(r.Delta2_max);
  os << ',';
  cell(r.P);
  os << ',';
  cell(r.C_lambda);
  os << ',';
  cell(r.delta_w);
  os << '\n';
  os.precision(prec);
}

}  // namespace superres
