#ifndef CTSCORE_ERRORS_HPP
#define CTSCORE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctscore {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix/vector sizes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument: non-finite entries, empty vectors, out-of-range options.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A caller-side precondition of a structural check does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The Gramian integration paths disagree or cannot be evaluated.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// The assembled Gramian / information matrix is not positive definite.
class InfeasiblePointError : public Error {
 public:
  using Error::Error;
};

/// The objective is not finite at the solver's starting point.
class InfeasibleStartError : public Error {
 public:
  using Error::Error;
};

/// Backtracking could not find an acceptable step.
class SolverStallError : public Error {
 public:
  SolverStallError(const std::string& what, int iteration, double step,
                   double objective)
      : Error(what), iteration_(iteration), step_(step), objective_(objective) {}

  int iteration() const { return iteration_; }
  double step() const { return step_; }
  double objective() const { return objective_; }

 private:
  int iteration_;
  double step_;
  double objective_;
};

/// The regression vectors of a design problem do not span the parameter space.
class SingularDesignError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the offending 1-based line number (0 if
/// the problem is not tied to a line).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Unknown command-line names (builtin networks, criteria, formats).
class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctscore

#endif  // CTSCORE_ERRORS_HPP
