#pragma once

#include <stdexcept>
#include <string>

namespace relnet {

// Exit codes shared by the CLI: 0 ok, 2 input error, 3 numeric failure,
// 4 missing artifact.
enum class ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kNumericFailure = 3,
  kMissingArtifact = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Malformed or inconsistent input data (files, corpora, arguments).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what)
      : Error(ExitCode::kInputError, what) {}
};

/// Invalid configuration, e.g. an entity id that has no aliases.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ExitCode::kInputError, what) {}
};

/// Non-finite loss or another numerical breakdown during training.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ExitCode::kNumericFailure, what) {}
};

class MissingArtifactError : public Error {
 public:
  explicit MissingArtifactError(const std::string& what)
      : Error(ExitCode::kMissingArtifact, what) {}
};

}  // namespace relnet
