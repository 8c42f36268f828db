#pragma once

#include <stdexcept>
#include <string>

namespace obliq {

/// Base class of every exception thrown by the library. The kind tag is
/// stable and is what the CLI reports in diagnostic JSON.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define OBLIQ_DEFINE_ERROR(Name, tag)                                     \
  class Name : public Error {                                              \
  public:                                                                  \
    explicit Name(const std::string& what) : Error(tag, what) {}           \
  }

OBLIQ_DEFINE_ERROR(DimensionError, "dimension");
OBLIQ_DEFINE_ERROR(InvalidEntryError, "invalid-entry");
OBLIQ_DEFINE_ERROR(ValidationError, "validation");
OBLIQ_DEFINE_ERROR(IndexError, "index");
OBLIQ_DEFINE_ERROR(RangeError, "range");
OBLIQ_DEFINE_ERROR(ParameterError, "parameter");
OBLIQ_DEFINE_ERROR(DomainError, "domain");
OBLIQ_DEFINE_ERROR(OrderingError, "ordering");
OBLIQ_DEFINE_ERROR(AlignmentError, "alignment");
OBLIQ_DEFINE_ERROR(MatrixError, "matrix");
OBLIQ_DEFINE_ERROR(PreconditionError, "precondition");
OBLIQ_DEFINE_ERROR(SolverError, "solver");
OBLIQ_DEFINE_ERROR(FormatError, "format");

#undef OBLIQ_DEFINE_ERROR

/// Iterative method failed to reach its tolerance. Carries the last two
/// iterates' summary values so callers can judge how close it came.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double previous, double last)
      : Error("convergence", what), previous_(previous), last_(last) {}

  double previous() const noexcept { return previous_; }
  double last() const noexcept { return last_; }

private:
  double previous_;
  double last_;
};

/// Increment domination X(t) - X(s) <= Xbar(t) - Xbar(s) failed on a grid.
class DominationError : public Error {
public:
  DominationError(const std::string& what, double s, double t, std::size_t component)
      : Error("domination", what), s_(s), t_(t), component_(component) {}

  double s() const noexcept { return s_; }
  double t() const noexcept { return t_; }
  /// Zero-based component index.
  std::size_t component() const noexcept { return component_; }

private:
  double s_;
  double t_;
  std::size_t component_;
};

}  // namespace obliq
