#include "superres/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "superres/errors.hpp"

namespace superres {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BundleState recorded_solve(const PenaltyProblem& p, const ExperimentConfig& cfg, int iters) {
  SolveOptions o;
  o.alpha = cfg.alpha;
  o.max_iters = iters;
  o.record_iterates = true;
  return solve(p, o);
}

/// Solves once for max(iterations, reference_iterations); a shorter run is a
/// prefix of a longer one, so both views come from the same history.
BundleState window_solve(const ExperimentConfig& cfg, const PenaltyProblem& p) {
  if (cfg.window_end > cfg.iterations) {
    throw InvalidArgument("ratio window ends after the last iteration");
  }
  const BundleState s = recorded_solve(p, cfg, std::max(cfg.iterations, cfg.reference_iterations));
  if (static_cast<int>(s.iterate_history.size()) <= cfg.window_end) {
    throw InvalidArgument("solver stopped before the end of the ratio window");
  }
  return s;
}

const Vector& reference_iterate(const BundleState& s, const ExperimentConfig& cfg) {
  const auto last = static_cast<std::size_t>(
      std::min<int>(cfg.reference_iterations, static_cast<int>(s.iterate_history.size()) - 1));
  return s.iterate_history[last];
}

std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_text(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

void write_csv_meta(std::ostream& os, const ExperimentConfig& cfg) {
  os << "# config_hash=" << cfg.hash_hex() << " seed=" << cfg.seed << '\n';
}

PenaltyProblem make_problem(const ExperimentConfig& cfg, const std::optional<Vector>& noise) {
  const Kernel k = cfg.kernel();
  return PenaltyProblem(synthesize(cfg.source(), cfg.grid(), k, noise), k, cfg.penalty(), cfg.tau);
}

SolveOutput run_solve(const ExperimentConfig& cfg) {
  const PenaltyProblem p = make_problem(cfg);
  SolveOptions o;
  o.alpha = cfg.alpha;
  o.max_iters = cfg.iterations;
  SolveOutput out;
  out.state = solve(p, o);
  out.lambda = out.state.iterate;
  RecoveryOptions ro;
  ro.threshold = cfg.support_threshold;
  try {
    out.recovery = recover(p.certificate(out.lambda), p.y(), ro);
  } catch (const EmptySupport& e) {
    out.support_error = e.what();
  }
  return out;
}

LambdaTResult run_exp_lambda_t(const ExperimentConfig& cfg) {
  const PenaltyProblem p = make_problem(cfg);
  const SourceModel src = cfg.source();
  LambdaTResult r;
  r.state = window_solve(cfg, p);
  r.lambda_best = reference_iterate(r.state, cfg);
  // Once the solver stalls the trailing iterates coincide with lambda_best;
  // the cutoff uses the last iterate that still differed from it.
  auto P = static_cast<std::size_t>(
      std::min<int>(cfg.reference_iterations, static_cast<int>(r.state.iterate_history.size()) - 1));
  while (P > 1 && r.state.iterate_history[P - 1] == r.lambda_best) --P;
  r.cutoff = (r.state.iterate_history[P - 1] - r.lambda_best).norm();
  r.report = full_report(src, p.grid(), p.kernel(), r.lambda_best, p.Pi(), p.tau(),
                         {cfg.p_variant, {}, {}});

  for (int it = cfg.window_start; it <= cfg.window_end; ++it) {
    const Vector& lam = r.state.iterate_history[static_cast<std::size_t>(it)];
    const double dlam = (lam - r.lambda_best).norm();
    if (dlam < r.cutoff || dlam == 0.0) continue;
    const Certificate cert = p.certificate(lam);
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double ti = src.locations()[i];
      const auto& sb = r.report.sources[i];
      LambdaTRow row{it, i, kNaN, dlam, kNaN, sb.Ct.value_or(kNaN), 2.0 * sb.Ct.value_or(kNaN), {}};
      try {
        row.t_err = std::abs(refine_location(cert, ti) - ti);
        row.ratio = row.t_err / dlam;
      } catch (const Error& e) {
        row.note = e.what();
      }
      r.rows.push_back(std::move(row));
    }
  }
  return r;
}

void write_lambda_t_csv(std::ostream& os, const ExperimentConfig& cfg, const LambdaTResult& r) {
  write_csv_meta(os, cfg);
  os << "p,source,t_err,lambda_err,ratio,Ct,bound,note\n";
  for (const auto& x : r.rows) {
    os << x.p << ',' << x.source << ',' << csv_num(x.t_err) << ',' << csv_num(x.lambda_err) << ','
       << csv_num(x.ratio) << ',' << csv_num(x.Ct) << ',' << csv_num(x.bound) << ',' << csv_text(x.note)
       << '\n';
  }
}

TAResult run_exp_t_a(const ExperimentConfig& cfg) {
  const PenaltyProblem p = make_problem(cfg);
  const SourceModel src = cfg.source();
  const Vector t_star = src.location_vector();
  const Vector a_star = src.amplitude_vector();
  const BundleState s = window_solve(cfg, p);

  TAResult r;
  const Matrix Phi = build_phi(p.grid(), p.kernel(), t_star);
  r.Ca = constant_Ca(cfg.sigma, p.dim(), a_star.norm(), numerics::sigma_min(Phi));

  for (int it = cfg.window_start; it <= cfg.window_end; ++it) {
    const Certificate cert = p.certificate(s.iterate_history[static_cast<std::size_t>(it)]);
    TARow row{it, kNaN, kNaN, kNaN, r.Ca.log10, {}};
    try {
      Vector t(t_star.size());
      for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = refine_location(cert, t_star[i]);
      row.t_err = (t - t_star).norm();
      const RecoveryResult rec = recover_amplitudes(p.grid(), p.kernel(), t, p.y());
      row.a_err = (rec.amplitudes - a_star).norm();
      if (row.t_err == 0.0) {
        row.note = "zero location error";
      } else {
        row.ratio = row.a_err / row.t_err;
      }
    } catch (const Error& e) {
      row.note = e.what();
    }
    r.rows.push_back(std::move(row));
  }
  return r;
}

void write_t_a_csv(std::ostream& os, const ExperimentConfig& cfg, const TAResult& r) {
  write_csv_meta(os, cfg);
  os << "p,a_err,t_err,ratio,Ca_log10,note\n";
  for (const auto& x : r.rows) {
    os << x.p << ',' << csv_num(x.a_err) << ',' << csv_num(x.t_err) << ',' << csv_num(x.ratio)
       << ',' << csv_num(x.Ca_log10) << ',' << csv_text(x.note) << '\n';
  }
}

NoiseResult run_exp_noise(const ExperimentConfig& cfg, unsigned threads) {
  const SourceModel src = cfg.source();
  const Vector t_star = src.location_vector();
  const PenaltyProblem clean = make_problem(cfg);
  SolveOptions o;
  o.alpha = cfg.alpha;
  o.max_iters = cfg.noise_iterations;
  const Vector lambda_ref = solve(clean, o).iterate;

  NoiseResult r;
  const BoundsReport rep = full_report(src, clean.grid(), clean.kernel(), lambda_ref, clean.Pi(),
                                       clean.tau(), {cfg.p_variant, {}, {}});
  r.selected = rep.selected;
  r.kept_lambda = rep.kept_lambda;
  r.C_lambda = rep.C_lambda.value_or(kNaN);
  if (!rep.C_lambda && rep.sigma_min_J) r.C_lambda = 2.0 / *rep.sigma_min_J;

  const std::vector<double> grid = cfg.noise_values();
  r.rows.resize(grid.size());
  auto restrict = [](const Vector& v, const std::vector<std::size_t>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(idx[i])];
    return out;
  };

  auto run_point = [&](std::size_t idx) {
    NoiseRow row{grid[idx], kNaN, kNaN, kNaN, r.C_lambda, kNaN, kNaN, kNaN, kNaN, kNaN, {}};
    try {
      if (grid[idx] == 0.0) {
        row.note = "zero noise";
        r.rows[idx] = std::move(row);
        return;
      }
      const Vector w = uniform_noise(clean.dim(), grid[idx], cfg.seed + idx);
      const PenaltyProblem noisy = make_problem(cfg, w);
      const Vector lam = solve(noisy, o).iterate;
      row.w_norm = w.norm();
      row.lambda_err = (lam - lambda_ref).norm();
      row.ratio_full = row.lambda_err / row.w_norm;
      if (!r.selected.empty()) {
        row.w_bar_norm = restrict(w, r.selected).norm();
        row.lambda_bar_err = (restrict(lam, r.kept_lambda) - restrict(lambda_ref, r.kept_lambda)).norm();
        row.ratio = row.lambda_bar_err / row.w_bar_norm;
      }
      const Certificate cert = noisy.certificate(lam);
      Vector t(t_star.size());
      for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = refine_location(cert, t_star[i]);
      row.t_err = (t - t_star).norm();
      row.t_ratio = row.t_err / row.w_norm;
    } catch (const std::exception& e) {
      row.note = e.what();
    }
    r.rows[idx] = std::move(row);
  };

  unsigned n = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(1, grid.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < grid.size(); i = next++) run_point(i);
    });
  }
  for (auto& th : pool) th.join();
  return r;
}

void write_noise_csv(std::ostream& os, const ExperimentConfig& cfg, const NoiseResult& r) {
  write_csv_meta(os, cfg);
  os << "w_c,w_bar_norm,lambda_bar_err,ratio,C_lambda,t_err,t_ratio,w_norm,lambda_err,ratio_full,note\n";
  for (const auto& x : r.rows) {
    os << csv_num(x.w_c) << ',' << csv_num(x.w_bar_norm) << ',' << csv_num(x.lambda_bar_err) << ','
       << csv_num(x.ratio) << ',' << csv_num(x.C_lambda) << ',' << csv_num(x.t_err) << ','
       << csv_num(x.t_ratio) << ',' << csv_num(x.w_norm) << ',' << csv_num(x.lambda_err) << ','
       << csv_num(x.ratio_full) << ',' << csv_text(x.note) << '\n';
  }
}

BoundsOutput run_bounds(const ExperimentConfig& cfg) {
  const PenaltyProblem p = make_problem(cfg);
  SolveOptions o;
  o.alpha = cfg.alpha;
  o.max_iters = cfg.reference_iterations;
  BoundsOutput out;
  out.lambda_best = solve(p, o).iterate;
  out.report = full_report(cfg.source(), p.grid(), p.kernel(), out.lambda_best, p.Pi(), p.tau(),
                           {cfg.p_variant, {}, {}});
  return out;
}

}  // namespace superres
