#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "superres/bounds.hpp"
#include "superres/config.hpp"
#include "superres/recovery.hpp"
#include "superres/solver.hpp"

namespace superres {

/// "# config_hash=<hex> seed=<n>" comment line that opens every CSV.
void write_csv_meta(std::ostream& os, const ExperimentConfig& cfg);

PenaltyProblem make_problem(const ExperimentConfig& cfg, const std::optional<Vector>& noise = {});

struct SolveOutput {
  BundleState state;
  Vector lambda;  ///< final iterate
  std::optional<RecoveryResult> recovery;
  std::string support_error;  ///< set when recovery failed
};

SolveOutput run_solve(const ExperimentConfig& cfg);

struct LambdaTRow {
  int p;
  std::size_t source;
  double t_err;
  double lambda_err;
  double ratio;
  double Ct;
  double bound;  ///< 2 C_t
  std::string note;  ///< non-empty when the location could not be refined
};

struct LambdaTResult {
  std::vector<LambdaTRow> rows;
  Vector lambda_best;
  double cutoff = 0.0;  ///< ||lambda^(P-1) - lambda_best||; rows below it are dropped
  BoundsReport report;
  BundleState state;
};

LambdaTResult run_exp_lambda_t(const ExperimentConfig& cfg);
void write_lambda_t_csv(std::ostream& os, const ExperimentConfig& cfg, const LambdaTResult& r);

struct TARow {
  int p;
  double a_err;
  double t_err;
  double ratio;
  double Ca_log10;
  std::string note;
};

struct TAResult {
  std::vector<TARow> rows;
  LogValue Ca;
};

TAResult run_exp_t_a(const ExperimentConfig& cfg);
void write_t_a_csv(std::ostream& os, const ExperimentConfig& cfg, const TAResult& r);

struct NoiseRow {
  double w_c;
  double w_bar_norm;
  double lambda_bar_err;
  double ratio;
  double C_lambda;
  double t_err;
  double t_ratio;  ///< t_err / ||w||
  double w_norm;
  double lambda_err;
  double ratio_full;
  std::string note;
};

struct NoiseResult {
  std::vector<NoiseRow> rows;  ///< ordered as the noise grid
  std::vector<std::size_t> selected;
  std::vector<std::size_t> kept_lambda;
  double C_lambda = 0.0;
};

/// threads == 0 picks the hardware concurrency.
NoiseResult run_exp_noise(const ExperimentConfig& cfg, unsigned threads = 0);
void write_noise_csv(std::ostream& os, const ExperimentConfig& cfg, const NoiseResult& r);

struct BoundsOutput {
  BoundsReport report;
  Vector lambda_best;
};

BoundsOutput run_bounds(const ExperimentConfig& cfg);

}  // namespace superres
