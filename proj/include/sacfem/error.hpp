#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sacfem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: configuration values, out-of-range arguments.
class ConfigError : public Error {
public:
  ConfigError(std::string key, const std::string &message)
      : Error(key + ": " + message), key_(std::move(key)) {}
  const std::string &key() const { return key_; }

private:
  std::string key_;
};

/// A mesh-level failure, e.g. a degenerate element found during assembly.
class MeshError : public Error {
public:
  MeshError(const std::string &message, long element = -1)
      : Error(message), element_(element) {}
  long element() const { return element_; }

private:
  long element_;
};

/// Iterative solver did not reach the requested residual.
class SolverError : public Error {
public:
  SolverError(const std::string &what, double relative_residual, int iterations)
      : Error(what + ": solver did not converge (relative residual " +
              std::to_string(relative_residual) + " after " +
              std::to_string(iterations) + " iterations)"),
        residual_(relative_residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

private:
  double residual_;
  int iterations_;
};

/// A time-stepping path failed (non-finite state or blow-up).
/// Carries the step index and the path seed so the run can be replayed.
class PathError : public Error {
public:
  PathError(const std::string &message, long step, std::uint64_t seed)
      : Error(message + " (step " + std::to_string(step) + ", seed " +
              std::to_string(seed) + ")"),
        step_(step), seed_(seed) {}
  long step() const { return step_; }
  std::uint64_t seed() const { return seed_; }

private:
  long step_;
  std::uint64_t seed_;
};

} // namespace sacfem
