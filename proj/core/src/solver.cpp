#include "superres/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <string>

#include "superres/errors.hpp"

namespace superres {

PenaltyProblem::PenaltyProblem(MeasurementSet measurements, Kernel kernel, double Pi, double tau,
                               std::size_t scan_points)
    : meas_(std::move(measurements)), kernel_(kernel), Pi_(Pi), tau_(tau) {
  if (!(Pi > 0.0)) throw InvalidArgument("penalty weight must be positive");
  if (!(tau > 0.0)) throw InvalidArgument("box radius must be positive");
  if (static_cast<std::size_t>(meas_.y.size()) != meas_.grid.size()) {
    throw InvalidArgument("measurement vector does not match sample grid");
  }
  scanner_ = std::make_shared<const CertificateScanner>(meas_.grid, kernel_, scan_points);
}

Subgradient subgradient(const PenaltyProblem& p, const Vector& lambda) {
  const auto sup = sup_q(p.certificate(lambda), p.scanner());
  const double lin = -p.y().dot(lambda);
  Subgradient out{-p.y(), std::nullopt, sup.value, lin + p.Pi() * std::max(sup.value - 1.0, 0.0)};
  // |v - 1| <= 1e-12 counts as active: nu_1 = 1 is admissible there too.
  if (sup.value > 1.0 || std::abs(sup.value - 1.0) <= 1e-12) {
    out.g += p.Pi() * feature_vector(p.grid(), p.kernel(), sup.t);
    out.t_active = sup.t;
  }
  return out;
}

double psi(const PenaltyProblem& p, const Vector& lambda) {
  const auto sup = sup_q(p.certificate(lambda), p.scanner());
  return -p.y().dot(lambda) + p.Pi() * std::max(sup.value - 1.0, 0.0);
}

CutModel::CutModel(Eigen::Index dim) : slopes_(16, dim), offsets_(16) {}

CutModel::CutModel(const std::vector<Cut>& cuts)
    : CutModel(cuts.empty() ? 0 : cuts.front().slope.size()) {
  for (const auto& c : cuts) add(c);
}

void CutModel::add(const Cut& cut) {
  if (cut.slope.size() != dim() || cut.anchor.size() != dim()) {
    throw InvalidArgument("cut dimension mismatch");
  }
  if (!cut.slope.allFinite() || !cut.anchor.allFinite() || !std::isfinite(cut.value)) {
    throw InvalidArgument("cut has non-finite entries");
  }
  if (n_ == slopes_.rows()) {
    slopes_.conservativeResize(2 * n_ + 1, Eigen::NoChange);
    offsets_.conservativeResize(2 * n_ + 1);
  }
  slopes_.row(n_) = cut.slope.transpose();
  offsets_[n_] = cut.value - cut.slope.dot(cut.anchor);
  ++n_;
}

double CutModel::value(const Vector& lambda) const {
  if (n_ == 0) return -std::numeric_limits<double>::infinity();
  return (offsets_.head(n_) + slopes_.topRows(n_) * lambda).maxCoeff();
}

CutModel::Min CutModel::minimize(double tau) {
  if (n_ == 0) throw InvalidArgument("model_min needs at least one cut");
  const Matrix G = slopes_.topRows(n_);
  const Vector c = offsets_.head(n_);
  const auto r = numerics::lp_min(G, c, tau, &warm_);
  return {r.value, r.argmin};
}

Vector CutModel::project(double level, const Vector& point, double tau) const {
  const Matrix A = slopes_.topRows(n_);
  const Vector b = Vector::Constant(n_, level) - offsets_.head(n_);
  try {
    return numerics::qp_project(point, A, b, tau);
  } catch (const Infeasible& e) {
    throw LevelSetEmpty(std::string("level set is numerically empty at level ") +
                        std::to_string(level) + ": " + e.what());
  }
}

CutModel::Min model_min(const std::vector<Cut>& cuts, double tau) {
  if (cuts.empty()) throw InvalidArgument("model_min needs at least one cut");
  CutModel model(cuts);
  return model.minimize(tau);
}

double model_value(const std::vector<Cut>& cuts, const Vector& lambda) {
  return CutModel(cuts).value(lambda);
}

Vector level_project(const std::vector<Cut>& cuts, double level, const Vector& point, double tau) {
  if (cuts.empty()) {
    return point.cwiseMax(-tau).cwiseMin(tau);
  }
  return CutModel(cuts).project(level, point, tau);
}

BundleState solve(const PenaltyProblem& p, const SolveOptions& opts) {
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (opts.max_iters < 0) throw InvalidArgument("iteration count must be non-negative");

  const auto m = static_cast<Eigen::Index>(p.dim());
  BundleState s;
  s.iterate = Vector::Zero(m);
  s.best = s.iterate;
  if (opts.record_iterates) s.iterate_history.push_back(s.iterate);

  CutModel model(m);
  for (int l = 1; l <= opts.max_iters; ++l) {
    const Vector prev = s.iterate;
    const auto sg = subgradient(p, prev);
    Cut cut{prev, sg.psi_value, sg.g};
    model.add(cut);
    s.cuts.push_back(std::move(cut));

    if (sg.psi_value < s.mu) {
      s.mu = sg.psi_value;
      s.best = prev;
    }
    // Any model minimum is a valid lower bound, so keeping the running max
    // only discards LP rounding; likewise nu never exceeds a value actually
    // attained.
    const auto mm = model.minimize(p.tau());
    s.nu = std::min(std::max(s.nu, mm.nu), s.mu);

    const double gap = s.mu - s.nu;
    s.mu_history.push_back(s.mu);
    s.nu_history.push_back(s.nu);
    s.gap_history.push_back(gap);
    s.iterations = l;

    const double level = opts.alpha * s.mu + (1.0 - opts.alpha) * s.nu;
    s.level_history.push_back(level);
    if (gap <= opts.gap_tol) {
      s.converged = true;
      break;
    }
    s.iterate = model.project(level, prev, p.tau());
    if (opts.record_iterates) s.iterate_history.push_back(s.iterate);
  }
  return s;
}

BundleState solve(const PenaltyProblem& p, double alpha, int max_iters, bool record_iterates) {
  SolveOptions o;
  o.alpha = alpha;
  o.max_iters = max_iters;
  o.record_iterates = record_iterates;
  return solve(p, o);
}

void write_convergence_csv(std::ostream& os, const BundleState& s, bool with_iterates) {
  os << "iter,mu,nu,gap";
  const bool lam = with_iterates && !s.iterate_history.empty();
  if (lam) {
    for (Eigen::Index j = 0; j < s.iterate.size(); ++j) os << ",lambda_" << (j + 1);
  }
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < s.gap_history.size(); ++i) {
    os << (i + 1) << ',' << s.mu_history[i] << ',' << s.nu_history[i] << ',' << s.gap_history[i];
    if (lam && i + 1 < s.iterate_history.size()) {
      const Vector& v = s.iterate_history[i + 1];
      for (Eigen::Index j = 0; j < v.size(); ++j) os << ',' << v[j];
    }
    os << '\n';
  }
}

}  // namespace superres
