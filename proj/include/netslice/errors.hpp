#pragma once

#include <stdexcept>
#include <string>

namespace netslice {

/// Invalid or inconsistent configuration parameters.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Loss or gradient became non-finite during training.
class TrainingDivergence : public std::runtime_error {
 public:
  explicit TrainingDivergence(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace netslice
