#include "superres/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <string>

#include "superres/errors.hpp"

namespace superres {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool stationary(const Certificate::Local& l) {
  return std::abs(l.d1) <= 1e-12 * std::max(1.0, l.d1_scale);
}

// Newton on q' from t inside [lo, hi]. When the bracket carries a
// down-crossing of q' (q'(lo) > 0 > q'(hi)) any bad Newton step falls back to
// bisection; otherwise a bad step is fatal.
double newton_stationary(const Certificate& c, double t, double lo, double hi, int max_iters) {
  const double d_lo = c.local(lo).d1;
  const double d_hi = c.local(hi).d1;
  const bool bracketed = d_lo > 0.0 && d_hi < 0.0;

  for (int it = 0; it < max_iters; ++it) {
    const auto l = c.local(t);
    if (stationary(l)) return t;
    if (bracketed) {
      if (l.d1 > 0.0) lo = t; else hi = t;
      if (hi - lo <= 4.0 * kEps * std::max(1.0, std::abs(t))) return t;
    }
    double next = std::numeric_limits<double>::quiet_NaN();
    if (l.d2 < 0.0) next = t - l.d1 / l.d2;
    if (!(next > lo && next < hi)) {
      if (!bracketed) {
        throw NoConvergence("Newton step left the bracket around " + std::to_string(t), t);
      }
      next = 0.5 * (lo + hi);
    }
    if (std::abs(next - t) <= 2.0 * kEps * std::max(1.0, std::abs(t))) return next;
    t = next;
  }
  if (bracketed && hi - lo <= 1e-12) return t;
  if (stationary(c.local(t))) return t;
  throw NoConvergence("Newton refinement hit the iteration cap", t);
}

struct Candidate {
  double t;
  double value;
  double curvature;
  bool interior;
};

// Local maxima of the scanned values, refined. `prefilter` drops grid maxima
// further than that below the grid supremum.
std::vector<Candidate> refined_local_maxima(const Certificate& c, const CertificateScanner& sc,
                                            const Vector& qs, double prefilter) {
  const auto n = static_cast<Eigen::Index>(qs.size());
  const double top = qs.maxCoeff();
  const double h = sc.step();
  std::vector<Candidate> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double left = i > 0 ? qs[i - 1] : -std::numeric_limits<double>::infinity();
    const double right = i + 1 < n ? qs[i + 1] : -std::numeric_limits<double>::infinity();
    if (!(qs[i] >= left && qs[i] > right) && !(qs[i] > left && qs[i] >= right)) continue;
    if (qs[i] < top - prefilter) continue;

    const double ti = sc.position(static_cast<std::size_t>(i));
    const double lo = std::max(0.0, ti - h);
    const double hi = std::min(1.0, ti + h);
    const auto at = c.local(ti);
    if (i == 0 && at.d1 <= 0.0) {
      out.push_back({0.0, at.q, at.d2, false});
      continue;
    }
    if (i == n - 1 && at.d1 >= 0.0) {
      out.push_back({1.0, at.q, at.d2, false});
      continue;
    }
    double t = ti;
    try {
      t = newton_stationary(c, ti, lo, hi, 100);
    } catch (const NoConvergence&) {
      continue;
    }
    const auto l = c.local(t);
    if (l.d2 > 0.0) continue;
    out.push_back({t, l.q, l.d2, true});
  }
  return out;
}

}  // namespace

Certificate::Certificate(Vector lambda, SampleGrid grid, Kernel kernel)
    : lambda_(std::move(lambda)), grid_(std::move(grid)), kernel_(kernel) {
  if (static_cast<std::size_t>(lambda_.size()) != grid_.size()) {
    throw InvalidArgument("certificate weights and sample grid differ in length");
  }
}

double Certificate::eval(double t, int order) const {
  if (order < 0 || order > 3) {
    throw InvalidArgument("unsupported certificate derivative order " + std::to_string(order));
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    const double d = t - grid_[j];
    const double v = order == 0 ? kernel_.phi(d) : kernel_.deriv(d, order);
    acc += lambda_[static_cast<Eigen::Index>(j)] * v;
  }
  return acc;
}

Certificate::Local Certificate::local(double t) const noexcept {
  const double inv_s2 = 1.0 / (kernel_.sigma() * kernel_.sigma());
  Local l{0.0, 0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    const double d = t - grid_[j];
    const double p = kernel_.phi(d);
    const double lam = lambda_[static_cast<Eigen::Index>(j)];
    const double p1 = -2.0 * d * inv_s2 * p;
    l.q += lam * p;
    l.d1 += lam * p1;
    l.d2 += lam * (4.0 * d * d * inv_s2 - 2.0) * inv_s2 * p;
    l.d1_scale += std::abs(lam * p1);
  }
  return l;
}

double q_eval(const Certificate& c, double t, int order) {
  if (order < 0 || order > 2) {
    throw InvalidArgument("q_eval supports orders 0, 1, 2; got " + std::to_string(order));
  }
  return c.eval(t, order);
}

CertificateScanner::CertificateScanner(const SampleGrid& grid, const Kernel& k, std::size_t points)
    : features_(static_cast<Eigen::Index>(points), static_cast<Eigen::Index>(grid.size())),
      step_(0.0) {
  if (points < 2) throw InvalidArgument("scan grid needs at least two points");
  step_ = 1.0 / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) * step_;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      features_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k.phi(t - grid[j]);
    }
  }
}

MaximizerSet global_maximizers(const Certificate& c, const CertificateScanner& scanner,
                               const MaximizerOptions& opts) {
  if (opts.grid_points < 101) throw InvalidArgument("grid_points must be at least 101");
  if (!(opts.merge_tol > 0.0)) throw InvalidArgument("merge_tol must be positive");

  const Vector qs = scanner.scan(c.lambda());
  const double top = qs.maxCoeff();
  const double bottom = qs.minCoeff();
  const double spread = top - bottom;
  MaximizerSet out;
  if (!(spread > 1e-14 * std::max(1.0, std::abs(top)))) return out;  // flat

  const double value_tol = opts.value_tol.value_or(1e-3 * spread);
  auto cands = refined_local_maxima(c, scanner, qs, 2.0 * value_tol + 1e-3 * spread);
  double sup = top;
  for (const auto& cd : cands) sup = std::max(sup, cd.value);

  std::vector<Candidate> kept;
  for (const auto& cd : cands) {
    if (!cd.interior) continue;
    if (cd.value < sup - value_tol) continue;
    if (opts.min_value && cd.value < *opts.min_value) continue;
    kept.push_back(cd);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.t < b.t; });

  std::vector<Candidate> merged;
  for (const auto& cd : kept) {
    if (!merged.empty() && cd.t - merged.back().t < opts.merge_tol) {
      if (cd.value > merged.back().value) merged.back() = cd;
      continue;
    }
    merged.push_back(cd);
  }
  for (const auto& cd : merged) {
    out.locations.push_back(cd.t);
    out.values.push_back(cd.value);
    out.curvatures.push_back(cd.curvature);
  }
  return out;
}

MaximizerSet global_maximizers(const Certificate& c, const MaximizerOptions& opts) {
  if (opts.grid_points < 101) throw InvalidArgument("grid_points must be at least 101");
  const CertificateScanner scanner(c.grid(), c.kernel(), opts.grid_points);
  return global_maximizers(c, scanner, opts);
}

MaximizerSet global_maximizers(const Certificate& c, std::size_t grid_points, double merge_tol) {
  MaximizerOptions opts;
  opts.grid_points = grid_points;
  opts.merge_tol = merge_tol;
  return global_maximizers(c, opts);
}

SupResult sup_q(const Certificate& c, const CertificateScanner& scanner) {
  const Vector qs = scanner.scan(c.lambda());
  const double top = qs.maxCoeff();
  const double spread = top - qs.minCoeff();
  if (!(spread > 1e-14 * std::max(1.0, std::abs(top)))) return {0.0, c.eval(0.0)};

  const auto cands = refined_local_maxima(c, scanner, qs, 1e-3 * spread + 1e-300);
  SupResult best{0.0, -std::numeric_limits<double>::infinity()};
  for (const auto& cd : cands) {
    if (cd.value > best.value || (cd.value == best.value && cd.t < best.t)) best = {cd.t, cd.value};
  }
  // Grid points themselves are admissible if every refinement failed.
  Eigen::Index imax = 0;
  qs.maxCoeff(&imax);
  if (top > best.value) best = {scanner.position(static_cast<std::size_t>(imax)), top};
  return best;
}

SupResult sup_q(const Certificate& c) {
  const CertificateScanner scanner(c.grid(), c.kernel());
  return sup_q(c, scanner);
}

CertificateReport validate_certificate(const Certificate& c, const SourceModel& src, double tol,
                                       double merge_tol) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  CertificateReport rep;
  bool ok = true;
  for (double t : src.locations()) {
    const double e = std::abs(c.eval(t) - 1.0);
    rep.source_errors.push_back(e);
    ok = ok && e <= tol;
  }
  auto near_source = [&](double t) {
    for (double s : src.locations()) {
      if (std::abs(t - s) <= merge_tol) return true;
    }
    return false;
  };

  const CertificateScanner scanner(c.grid(), c.kernel());
  const Vector qs = scanner.scan(c.lambda());
  double away = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < qs.size(); ++i) {
    if (!near_source(scanner.position(static_cast<std::size_t>(i)))) away = std::max(away, qs[i]);
  }
  const double spread = qs.maxCoeff() - qs.minCoeff();
  for (const auto& cd : refined_local_maxima(c, scanner, qs, spread + 1.0)) {
    if (!near_source(cd.t)) away = std::max(away, cd.value);
  }
  rep.away_sup = away;
  rep.pass = ok && away <= 1.0 + tol;
  return rep;
}

double refine_location(const Certificate& c, double t0, int max_iters) {
  const double s = c.kernel().sigma();
  return newton_stationary(c, t0, t0 - s, t0 + s, max_iters);
}

void write_certificate_csv(std::ostream& os, const Certificate& c, std::size_t points) {
  const CertificateScanner scanner(c.grid(), c.kernel(), points);
  const Vector qs = scanner.scan(c.lambda());
  os << "t,q\n" << std::setprecision(17);
  for (std::size_t i = 0; i < points; ++i) {
    os << scanner.position(i) << ',' << qs[static_cast<Eigen::Index>(i)] << '\n';
  }
}

}  // namespace superres
