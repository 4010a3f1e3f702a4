#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace malgpro {

/// Base class of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Covariance matrix has no Cholesky factor.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// A required derivative callback is absent and no fallback is enabled.
class ConfigurationError : public Error {
 public:
  ConfigurationError(const std::string& callback, const std::string& context)
      : Error(context + ": missing callback '" + callback + "'"), callback_(callback) {}
  const std::string& callback() const noexcept { return callback_; }

 private:
  std::string callback_;
};

/// A forward path produced a non-finite state.
class DivergedPathError : public Error {
 public:
  DivergedPathError(std::size_t path, std::size_t step)
      : Error("path " + std::to_string(path) + " diverged at step " + std::to_string(step)),
        path_(path),
        step_(step) {}
  std::size_t path() const noexcept { return path_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t path_;
  std::size_t step_;
};

/// Y-flow condition estimate exceeded the factorized-mode limit.
class IllConditionedFlowError : public Error {
 public:
  IllConditionedFlowError(std::size_t node, double condition)
      : Error("flow condition estimate " + std::to_string(condition) + " at node " + std::to_string(node) +
              " exceeds 1e8; use dense flow mode"),
        node_(node),
        condition_(condition) {}
  std::size_t node() const noexcept { return node_; }
  double condition() const noexcept { return condition_; }

 private:
  std::size_t node_;
  double condition_;
};

class PoisonedGradientError : public Error {
 public:
  using Error::Error;
};

/// Too many diverged paths in one solver iteration.
class UnstableProblemError : public Error {
 public:
  using Error::Error;
};

/// A run specification field is missing, ill-typed or out of range.
class ValidationError : public InvalidArgument {
 public:
  ValidationError(const std::string& field, const std::string& message)
      : InvalidArgument("field '" + field + "': " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Unknown registry identifier.
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace malgpro
