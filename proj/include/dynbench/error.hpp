#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dynbench {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing or invalid configuration (parameter names, probabilities, bounds).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input too short for the requested windowing or bootstrap.
class SizingError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state produced by an integrator.
class BlowupError : public Error {
 public:
  BlowupError(std::string system, std::int64_t step)
      : Error("integration blowup in " + system + " at step " + std::to_string(step)),
        system_(std::move(system)),
        step_(step) {}

  const std::string& system() const { return system_; }
  std::int64_t step() const { return step_; }

 private:
  std::string system_;
  std::int64_t step_;
};

/// Training diverged (non-finite loss or gradient).
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::int64_t step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

}  // namespace dynbench
