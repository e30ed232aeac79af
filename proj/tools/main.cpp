#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "superres/config.hpp"
#include "superres/errors.hpp"
#include "superres/experiments.hpp"

namespace fs = std::filesystem;
using namespace superres;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kNoSupport = 4 };

struct Common {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> iters;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key=value experiment file")->required();
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "override the configured seed");
  sub->add_option("--iters", c.iters, "override the iteration count of this command");
}

std::ofstream open_out(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  const fs::path p = fs::path(c.out) / name;
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "config error [" << e.key() << "]: " << e.what() << '\n';
    return kConfig;
  } catch (const EmptySupport& e) {
    std::cerr << "no support: " << e.what() << '\n';
    return kNoSupport;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  }
}

ExperimentConfig load(const Common& c, int ExperimentConfig::*iters_field) {
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.iters) {
    if (*c.iters < 0) throw ConfigError("--iters must be non-negative", "iters");
    cfg.*iters_field = *c.iters;
  }
  cfg.validate();
  return cfg;
}

int cmd_solve(const Common& c) {
  const ExperimentConfig cfg = load(c, &ExperimentConfig::iterations);
  const SolveOutput out = run_solve(cfg);
  const PenaltyProblem p = make_problem(cfg);

  {
    auto os = open_out(c, "convergence.csv");
    write_csv_meta(os, cfg);
    write_convergence_csv(os, out.state, false);
  }
  {
    auto os = open_out(c, "certificate.csv");
    write_csv_meta(os, cfg);
    write_certificate_csv(os, p.certificate(out.lambda));
  }
  {
    auto os = open_out(c, "recovery.csv");
    write_csv_meta(os, cfg);
    write_recovery_csv(os, out.recovery.value_or(RecoveryResult{}));
  }

  nlohmann::ordered_json j;
  j["config_hash"] = cfg.hash_hex();
  j["seed"] = cfg.seed;
  j["iterations"] = out.state.iterations;
  j["mu"] = out.state.mu;
  j["nu"] = out.state.nu;
  j["gap"] = out.state.gap_history.empty() ? 0.0 : out.state.gap_history.back();
  if (out.recovery) {
    const auto& r = *out.recovery;
    j["locations"] = std::vector<double>(r.locations.begin(), r.locations.end());
    j["amplitudes"] = std::vector<double>(r.amplitudes.begin(), r.amplitudes.end());
    j["residual_norm"] = r.residual_norm;
    j["sigma_max"] = r.sigma_max;
    j["sigma_min"] = r.sigma_min;
    j["negative_amplitudes"] = r.negative;
  } else {
    j["support_error"] = out.support_error;
  }
  open_out(c, "summary.json") << j.dump(2) << '\n';

  if (!out.recovery) {
    std::cerr << "no support: " << out.support_error << '\n';
    return kNoSupport;
  }
  if (!out.recovery->negative.empty()) {
    std::cerr << "warning: " << out.recovery->negative.size() << " negative amplitude(s)\n";
  }
  std::cout << "recovered " << out.recovery->locations.size() << " spikes, gap "
            << j["gap"].get<double>() << '\n';
  return kOk;
}

int cmd_lambda_t(const Common& c) {
  const ExperimentConfig cfg = load(c, &ExperimentConfig::iterations);
  const LambdaTResult r = run_exp_lambda_t(cfg);
  auto os = open_out(c, "lambda_t.csv");
  write_lambda_t_csv(os, cfg, r);
  std::cout << r.rows.size() << " rows\n";
  return kOk;
}

int cmd_t_a(const Common& c) {
  const ExperimentConfig cfg = load(c, &ExperimentConfig::iterations);
  const TAResult r = run_exp_t_a(cfg);
  auto os = open_out(c, "t_a.csv");
  write_t_a_csv(os, cfg, r);
  std::cout << r.rows.size() << " rows\n";
  return kOk;
}

int cmd_noise(const Common& c, unsigned threads) {
  const ExperimentConfig cfg = load(c, &ExperimentConfig::noise_iterations);
  const NoiseResult r = run_exp_noise(cfg, threads);
  auto os = open_out(c, "noise.csv");
  write_noise_csv(os, cfg, r);
  std::cout << r.rows.size() << " rows\n";
  return kOk;
}

int cmd_bounds(const Common& c) {
  const ExperimentConfig cfg = load(c, &ExperimentConfig::reference_iterations);
  const BoundsOutput out = run_bounds(cfg);
  {
    auto os = open_out(c, "bounds.txt");
    os << "# config_hash=" << cfg.hash_hex() << " seed=" << cfg.seed << '\n';
    write_report(os, out.report);
  }
  {
    auto os = open_out(c, "bounds.csv");
    write_csv_meta(os, cfg);
    write_report_csv(os, out.report);
  }
  for (const auto& [key, why] : out.report.errors) std::cerr << key << ": " << why << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-negative spike super-resolution through the dual certificate"};
  app.require_subcommand(1);

  Common solve_opts, lt_opts, ta_opts, noise_opts, bounds_opts;
  unsigned threads = 0;
  add_common(app.add_subcommand("solve", "solve and recover the spike train"), solve_opts);
  add_common(app.add_subcommand("exp-lambda-t", "location error against dual error"), lt_opts);
  add_common(app.add_subcommand("exp-t-a", "amplitude error against location error"), ta_opts);
  auto* noise = app.add_subcommand("exp-noise", "dual error against measurement noise");
  add_common(noise, noise_opts);
  noise->add_option("--threads", threads, "worker threads, 0 = all cores");
  add_common(app.add_subcommand("bounds", "evaluate every perturbation constant"), bounds_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  return guarded([&] {
    if (name == "solve") return cmd_solve(solve_opts);
    if (name == "exp-lambda-t") return cmd_lambda_t(lt_opts);
    if (name == "exp-t-a") return cmd_t_a(ta_opts);
    if (name == "exp-noise") return cmd_noise(noise_opts, threads);
    return cmd_bounds(bounds_opts);
  });
}
