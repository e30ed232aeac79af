#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "superres/bounds.hpp"
#include "superres/kernel.hpp"
#include "superres/model.hpp"

namespace superres {

/// Experiment description read from a key=value file.
///
///   sources              comma-separated locations in [0, 1]      (required)
///   amplitudes           comma-separated positive weights         (required)
///   sigma                kernel width                             (required)
///   m | samples          equispaced count, or explicit positions  (one required)
///   tau                  box radius, default 1e5
///   pi                   penalty, default 2 * sum(amplitudes)
///   alpha                level parameter, default 0.25
///   iterations           default 500
///   reference_iterations default 500
///   seed                 default 1
///   window_start         default 20
///   window_end           default 270
///   noise_iterations     default 100
///   noise_grid           comma-separated w_c values, default the built-in sweep
///   p_variant            theorem | lemma, default theorem
///   support_threshold    default 1e-3
///
/// Blank lines and lines starting with '#' are ignored.
struct ExperimentConfig {
  std::vector<double> sources;
  std::vector<double> amplitudes;
  double sigma = 0.0;
  std::optional<std::size_t> m;
  std::vector<double> samples;
  double tau = 1e5;
  std::optional<double> Pi;
  double alpha = 0.25;
  int iterations = 500;
  int reference_iterations = 500;
  std::uint64_t seed = 1;
  int window_start = 20;
  int window_end = 270;
  int noise_iterations = 100;
  std::optional<std::vector<double>> noise_grid;
  PVariant p_variant = PVariant::theorem;
  double support_threshold = 1e-3;

  SourceModel source() const;
  SampleGrid grid() const;
  Kernel kernel() const { return Kernel(sigma); }
  double penalty() const;
  std::vector<double> noise_values() const;

  /// Throws ConfigError naming the first offending key.
  void validate() const;

  /// Normalised key=value text; equal configs give equal text.
  std::string canonical() const;
  /// FNV-1a 64 of canonical().
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

}  // namespace superres
