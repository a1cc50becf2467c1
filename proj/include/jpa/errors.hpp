#pragma once

#include <stdexcept>
#include <string>

namespace jpa {

/// Signal frequency sits on (or within 1e-12 relative of) a pole of the
/// linearized response; the operating point is at the instability threshold.
class PoleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Projection window does not span an integer number of cycles of the
/// requested tone. Rejected instead of silently leaking power across bins.
class CommensurabilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// S11 (or an idler ratio) was requested where the incident projection
/// vanishes.
class UndefinedRatioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An implicit solve (BDF-2 step, corrector, fit) failed to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integration aborted because the step budget was exhausted.
class StepBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config file problems carry the offending line number.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

}  // namespace jpa
