#include <cmath>
#include <sstream>

#include "doctest.h"

#include "superres/config.hpp"
#include "superres/experiments.hpp"

using namespace superres;

namespace {

ExperimentConfig three_sources() {
  ExperimentConfig c;
  c.sources = {0.25, 0.63, 0.889};
  c.amplitudes = {0.8, 0.5, 0.9};
  c.sigma = 0.07;
  c.m = 21;
  c.tau = 1e5;
  c.Pi = 100.0;
  c.validate();
  return c;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("solve and recover") {
  auto cfg = three_sources();
  const auto out = run_solve(cfg);
  REQUIRE(out.recovery.has_value());
  REQUIRE(out.recovery->locations.size() == 3);
  for (Eigen::Index i = 0; i < 3; ++i)
    CHECK(std::abs(out.recovery->locations[i] - cfg.sources[static_cast<std::size_t>(i)]) <= 1e-6);

  cfg.iterations = 0;
  const auto none = run_solve(cfg);
  CHECK_FALSE(none.recovery.has_value());
  CHECK_FALSE(none.support_error.empty());
}

TEST_CASE("location against dual error") {
  const auto cfg = three_sources();
  const auto r = run_exp_lambda_t(cfg);
  REQUIRE_FALSE(r.rows.empty());
  std::size_t per_source[3] = {0, 0, 0};
  for (const auto& row : r.rows) {
    ++per_source[row.source];
    CHECK(row.p >= cfg.window_start);
    CHECK(row.p <= cfg.window_end);
    CHECK(row.lambda_err >= r.cutoff);
    if (row.note.empty()) {
      CHECK(std::isfinite(row.ratio));
      CHECK(row.ratio >= 0.0);
    }
  }
  CHECK(per_source[0] == per_source[1]);
  CHECK(per_source[1] == per_source[2]);
  CHECK(per_source[0] <= static_cast<std::size_t>(cfg.window_end - cfg.window_start + 1));

  std::ostringstream a, b;
  write_lambda_t_csv(a, cfg, r);
  write_lambda_t_csv(b, cfg, run_exp_lambda_t(cfg));
  CHECK(a.str() == b.str());
  CHECK(first_line(a.str()) == "# config_hash=" + cfg.hash_hex() + " seed=1");
}

TEST_CASE("amplitude against location error") {
  const auto cfg = three_sources();
  const auto r = run_exp_t_a(cfg);
  CHECK(r.rows.size() == static_cast<std::size_t>(cfg.window_end - cfg.window_start + 1));
  CHECK(r.Ca.log10 > 354.0);
  for (const auto& row : r.rows) {
    if (!row.note.empty()) continue;
    CHECK(std::isfinite(row.ratio));
    CHECK(std::log10(row.ratio) < row.Ca_log10);
  }
  std::ostringstream os;
  write_t_a_csv(os, cfg, r);
  CHECK(os.str().find("p,a_err,t_err,ratio,Ca_log10,note\n") != std::string::npos);
}

TEST_CASE("window past the last iteration") {
  auto cfg = three_sources();
  cfg.iterations = 100;
  cfg.window_end = 300;
  CHECK_THROWS(run_exp_t_a(cfg));
}

TEST_CASE("noise sweep") {
  auto cfg = three_sources();
  cfg.noise_grid = std::vector<double>{0.0, 1e-4, 1e-3, 1e-2};
  cfg.noise_iterations = 60;
  const auto r1 = run_exp_noise(cfg, 1);
  const auto r3 = run_exp_noise(cfg, 3);
  REQUIRE(r1.rows.size() == 4);
  CHECK(r1.rows[0].note == "zero noise");
  CHECK(std::isnan(r1.rows[0].ratio));
  for (std::size_t i = 0; i < 4; ++i) CHECK(r1.rows[i].w_c == (*cfg.noise_grid)[i]);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(r1.rows[i].note.empty());
    CHECK(r1.rows[i].w_norm > 0.0);
    CHECK(r1.rows[i].w_bar_norm <= r1.rows[i].w_norm);
  }
  CHECK(r1.selected.size() == 6);
  CHECK(r1.kept_lambda.size() == 3);

  std::ostringstream a, b;
  write_noise_csv(a, cfg, r1);
  write_noise_csv(b, cfg, r3);
  CHECK(a.str() == b.str());
}

TEST_CASE("bounds report") {
  auto cfg = three_sources();
  const auto out = run_bounds(cfg);
  CHECK(out.report.sources.size() == 3);
  CHECK(out.report.P.has_value());
  CHECK(out.report.Ca.has_value());
  std::ostringstream os;
  write_report(os, out.report);
  for (const char* key : {"k=", "Ct_0=", "Ct_alt_2=", "Ca_log10=", "t_radius_log10=", "P=", "C_lambda="})
    CHECK(os.str().find(key) != std::string::npos);
}
