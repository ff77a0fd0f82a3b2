#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace heisgeo {

/// Root of the library's exception hierarchy.
///
/// `field()` carries a JSON pointer (e.g. "/r/1") naming the offending input
/// when the error can be attributed to one.
class Error : public std::runtime_error
{
public:
  explicit Error(const std::string & what, std::string field = {})
      : std::runtime_error(what), field_(std::move(field))
  {}

  const std::string & field() const noexcept { return field_; }

  /// Prepends the pointer of an enclosing record, e.g. "/entries/2".
  void prefix_field(const std::string & outer) { field_ = outer + field_; }

private:
  std::string field_;
};

/// Input that violates a documented precondition. The CLI maps these to exit 2.
class InvalidInput : public Error
{
public:
  using Error::Error;
};

class DivisibilityError : public InvalidInput
{
public:
  DivisibilityError(const std::string & what, std::size_t index, std::string field = {})
      : InvalidInput(what, std::move(field)), index_(index)
  {}

  /// 1-based index i such that r_i does not divide r_{i+1}.
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

class NonPositiveEntry : public InvalidInput
{
public:
  using InvalidInput::InvalidInput;
};

class DimensionMismatch : public InvalidInput
{
public:
  using InvalidInput::InvalidInput;
};

class SingularMatrix : public InvalidInput
{
public:
  using InvalidInput::InvalidInput;
};

/// Riemannian coefficient requested for a corank-one metric (rho = 0).
class RankDeficient : public InvalidInput
{
public:
  using InvalidInput::InvalidInput;
};

/// Systolic bound requested for a metric with rho != 0.
class RankError : public InvalidInput
{
public:
  using InvalidInput::InvalidInput;
};

class MixedDimension : public InvalidInput
{
public:
  using InvalidInput::InvalidInput;
};

class TooFewEntries : public InvalidInput
{
public:
  using InvalidInput::InvalidInput;
};

/// The diameter hypotheses of the four-segment fiber path do not hold.
class HypothesisViolated : public Error
{
public:
  using Error::Error;
};

/// Two independent computations of the same quantity disagree.
class NumericalInconsistency : public Error
{
public:
  using Error::Error;
};

/// No geodesic endpoint root could be bracketed.
class ShootingFailure : public Error
{
public:
  ShootingFailure(const std::string & what, double upper_bound)
      : Error(what), upper_bound_(upper_bound)
  {}

  /// Length of an explicit (non-geodesic) admissible path to the target.
  double upper_bound() const noexcept { return upper_bound_; }

private:
  double upper_bound_;
};

}  // namespace heisgeo
