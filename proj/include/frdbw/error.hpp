#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace frdbw {

//! Failure categories raised by the library. Each maps to a stable name used
//! in CLI diagnostics.
enum class ErrorKind
{
  singular_design,
  empty_side,
  degenerate_sample,
  insufficient_data,
  weak_discontinuity,
  degenerate_objective,
  assumption_violated,
  zero_curvature,
  denominator_near_zero,
  all_trimmed,
  invalid_argument,
  usage,
  parse,
  validation
};

inline std::string_view
to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::singular_design:
      return "SingularDesign";
    case ErrorKind::empty_side:
      return "EmptySide";
    case ErrorKind::degenerate_sample:
      return "DegenerateSample";
    case ErrorKind::insufficient_data:
      return "InsufficientData";
    case ErrorKind::weak_discontinuity:
      return "WeakDiscontinuity";
    case ErrorKind::degenerate_objective:
      return "DegenerateObjective";
    case ErrorKind::assumption_violated:
      return "AssumptionViolated";
    case ErrorKind::zero_curvature:
      return "ZeroCurvature";
    case ErrorKind::denominator_near_zero:
      return "DenominatorNearZero";
    case ErrorKind::all_trimmed:
      return "AllTrimmed";
    case ErrorKind::invalid_argument:
      return "InvalidArgument";
    case ErrorKind::usage:
      return "UsageError";
    case ErrorKind::parse:
      return "ParseError";
    case ErrorKind::validation:
      return "ValidationError";
  }
  return "Error";
}

class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message)
    , kind_(kind)
  {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void
fail(ErrorKind kind, const std::string& message)
{
  throw Error(kind, message);
}

} // namespace frdbw
