#pragma once

#include <stdexcept>
#include <string>

namespace wrt
{

// Every failure raised by the library derives from wrt::Error.  The CLI maps
// the concrete type onto its exit-code table, so new error kinds must be added
// there as well.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Weights or matrices of different rank were combined.
class DimensionError : public Error
{
public:
  using Error::Error;
};

// An argument lies outside the domain of the operation (e.g. a label outside
// the level-k alcove).
class DomainError : public Error
{
public:
  using Error::Error;
};

class CapacityError : public Error
{
public:
  using Error::Error;
};

// A quantity that must be an integer was not within the rounding budget.
class IntegralityError : public Error
{
public:
  IntegralityError(std::string const &what, double residue)
      : Error(what), residue_(residue)
  {}
  double residue() const noexcept { return residue_; }

private:
  double residue_;
};

class AdmissibilityError : public Error
{
public:
  using Error::Error;
};

class UnsupportedConfiguration : public Error
{
public:
  using Error::Error;
};

class InvariantViolation : public Error
{
public:
  using Error::Error;
};

class ConsistencyError : public Error
{
public:
  using Error::Error;
};

class WordError : public Error
{
public:
  using Error::Error;
};

class EmptySweepError : public Error
{
public:
  using Error::Error;
};

class DetectionFailure : public Error
{
public:
  DetectionFailure(std::string const &what, double condition_number)
      : Error(what), condition_(condition_number)
  {}
  double condition_number() const noexcept { return condition_; }

private:
  double condition_;
};

class CollinearityError : public Error
{
public:
  using Error::Error;
};

class DegreeUndetermined : public Error
{
public:
  using Error::Error;
};

class ParseError : public Error
{
public:
  using Error::Error;
};

class SamplingFailure : public Error
{
public:
  using Error::Error;
};

} // namespace wrt
