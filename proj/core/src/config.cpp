#include "superres/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "superres/errors.hpp"

namespace superres {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError("'" + key + "': not a finite number: '" + t + "'", key);
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("'" + key + "': not an integer: '" + t + "'", key);
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError("'" + key + "': empty list", key);
  return out;
}

int parse_count(const std::string& key, const std::string& text) {
  const long long v = parse_int(key, text);
  if (v < 0 || v > 10'000'000) throw ConfigError("'" + key + "': out of range", key);
  return static_cast<int>(v);
}

std::string join(const std::vector<double>& v) {
  std::string s;
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    if (i) s += ',';
    s += buf;
  }
  return s;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SourceModel ExperimentConfig::source() const { return SourceModel(sources, amplitudes); }

SampleGrid ExperimentConfig::grid() const {
  if (!samples.empty()) return SampleGrid(samples);
  return SampleGrid::equispaced(m.value_or(0));
}

double ExperimentConfig::penalty() const {
  if (Pi) return *Pi;
  return 2.0 * std::accumulate(amplitudes.begin(), amplitudes.end(), 0.0,
                               [](double acc, double a) { return acc + std::abs(a); });
}

std::vector<double> ExperimentConfig::noise_values() const {
  return noise_grid ? *noise_grid : superres::noise_grid();
}

void ExperimentConfig::validate() const {
  if (sources.empty()) throw ConfigError("'sources' is required", "sources");
  if (amplitudes.empty()) throw ConfigError("'amplitudes' is required", "amplitudes");
  if (amplitudes.size() != sources.size()) {
    throw ConfigError("'amplitudes' must have one entry per source", "amplitudes");
  }
  try {
    (void)source();
  } catch (const Error& e) {
    throw ConfigError(std::string("'sources': ") + e.what(), "sources");
  }
  if (!(sigma > 0.0)) throw ConfigError("'sigma' must be positive", "sigma");
  if (!m && samples.empty()) throw ConfigError("one of 'm' or 'samples' is required", "m");
  if (m && !samples.empty()) throw ConfigError("give 'm' or 'samples', not both", "samples");
  if (m && *m == 0) throw ConfigError("'m' must be positive", "m");
  if (!samples.empty()) {
    try {
      (void)SampleGrid(samples);
    } catch (const Error& e) {
      throw ConfigError(std::string("'samples': ") + e.what(), "samples");
    }
  }
  if (!(tau > 0.0)) throw ConfigError("'tau' must be positive", "tau");
  if (Pi && !(*Pi > 0.0)) throw ConfigError("'pi' must be positive", "pi");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("'alpha' must lie in (0, 1)", "alpha");
  if (window_start < 1) throw ConfigError("'window_start' must be at least 1", "window_start");
  if (window_end < window_start) {
    throw ConfigError("'window_end' must not precede 'window_start'", "window_end");
  }
  if (iterations > 0 && window_end > iterations) {
    throw ConfigError("'window_end' exceeds 'iterations'", "window_end");
  }
  if (reference_iterations < 1) {
    throw ConfigError("'reference_iterations' must be positive", "reference_iterations");
  }
  if (noise_grid) {
    for (double w : *noise_grid) {
      if (w < 0.0) throw ConfigError("'noise_grid' values must be non-negative", "noise_grid");
    }
  }
  if (!(support_threshold > 0.0 && support_threshold < 1.0)) {
    throw ConfigError("'support_threshold' must lie in (0, 1)", "support_threshold");
  }
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "sources=" << join(sources) << '\n';
  os << "amplitudes=" << join(amplitudes) << '\n';
  os << "sigma=" << num(sigma) << '\n';
  if (m) os << "m=" << *m << '\n';
  if (!samples.empty()) os << "samples=" << join(samples) << '\n';
  os << "tau=" << num(tau) << '\n';
  os << "pi=" << num(penalty()) << '\n';
  os << "alpha=" << num(alpha) << '\n';
  os << "iterations=" << iterations << '\n';
  os << "reference_iterations=" << reference_iterations << '\n';
  os << "seed=" << seed << '\n';
  os << "window_start=" << window_start << '\n';
  os << "window_end=" << window_end << '\n';
  os << "noise_iterations=" << noise_iterations << '\n';
  if (noise_grid) os << "noise_grid=" << join(*noise_grid) << '\n';
  os << "p_variant=" << (p_variant == PVariant::theorem ? "theorem" : "lemma") << '\n';
  os << "support_threshold=" << num(support_threshold) << '\n';
  return os.str();
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value", trim(t));
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (seen[key]++) throw ConfigError("'" + key + "' given twice", key);

    if (key == "sources") {
      c.sources = parse_list(key, val);
    } else if (key == "amplitudes") {
      c.amplitudes = parse_list(key, val);
    } else if (key == "sigma") {
      c.sigma = parse_double(key, val);
    } else if (key == "m") {
      const long long v = parse_int(key, val);
      if (v <= 0) throw ConfigError("'m' must be positive", key);
      c.m = static_cast<std::size_t>(v);
    } else if (key == "samples") {
      c.samples = parse_list(key, val);
    } else if (key == "tau") {
      c.tau = parse_double(key, val);
    } else if (key == "pi") {
      c.Pi = parse_double(key, val);
    } else if (key == "alpha") {
      c.alpha = parse_double(key, val);
    } else if (key == "iterations") {
      c.iterations = parse_count(key, val);
    } else if (key == "reference_iterations") {
      c.reference_iterations = parse_count(key, val);
    } else if (key == "seed") {
      const long long v = parse_int(key, val);
      if (v < 0) throw ConfigError("'seed' must be non-negative", key);
      c.seed = static_cast<std::uint64_t>(v);
    } else if (key == "window_start") {
      c.window_start = parse_count(key, val);
    } else if (key == "window_end") {
      c.window_end = parse_count(key, val);
    } else if (key == "noise_iterations") {
      c.noise_iterations = parse_count(key, val);
    } else if (key == "noise_grid") {
      c.noise_grid = parse_list(key, val);
    } else if (key == "p_variant") {
      if (val == "theorem") {
        c.p_variant = PVariant::theorem;
      } else if (val == "lemma") {
        c.p_variant = PVariant::lemma;
      } else {
        throw ConfigError("'p_variant' must be 'theorem' or 'lemma'", key);
      }
    } else if (key == "support_threshold") {
      c.support_threshold = parse_double(key, val);
    } else {
      throw ConfigError("unknown key '" + key + "'", key);
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", "config");
  return parse_config(in);
}

}  // namespace superres
