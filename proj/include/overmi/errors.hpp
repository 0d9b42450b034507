#pragma once

#include <stdexcept>
#include <string>

namespace overmi {

/// Problems with the respondent regression fit. The study harness catches
/// these to resample a replicate instead of aborting a whole run.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficientError : public FitError {
 public:
  using FitError::FitError;
};

class InsufficientRespondentsError : public FitError {
 public:
  using FitError::FitError;
};

class InsufficientImputationsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateSampleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateVarianceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised while parsing a scenario config file; `key` names the offending
/// section or section.key entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error("config error [" + key + "]: " + message),
        key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Raised when an imputation CSV file does not match the expected schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace overmi
