#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace superres {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// q''(t) >= 0 where a strict local maximum is required.
class InvalidCurvature : public Error {
 public:
  InvalidCurvature(const std::string& what, double curvature)
      : Error(what), curvature_(curvature) {}
  double curvature() const noexcept { return curvature_; }

 private:
  double curvature_;
};

/// Newton refinement left its bracket or hit the iteration cap.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double last_iterate)
      : Error(what), last_iterate_(last_iterate) {}
  double last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_iterate_;
};

class IllConditioned : public Error {
 public:
  IllConditioned(const std::string& what, double sigma_min)
      : Error(what), sigma_min_(sigma_min) {}
  double sigma_min() const noexcept { return sigma_min_; }

 private:
  double sigma_min_;
};

class NotInvertible : public IllConditioned {
 public:
  using IllConditioned::IllConditioned;
};

class EmptySupport : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

/// Denominator of a perturbation constant is non-positive.
class RadiusTooLarge : public Error {
 public:
  RadiusTooLarge(const std::string& what, double margin)
      : Error(what), margin_(margin) {}
  double margin() const noexcept { return margin_; }

 private:
  double margin_;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class LevelSetEmpty : public Infeasible {
 public:
  using Infeasible::Infeasible;
};

/// Iteration cap reached inside a dense numerical kernel.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key)
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace superres
