// Exception hierarchy shared by every simdyn module.
//
// Each class maps onto one failure category; the CLI turns the category into
// a process exit code (see cli/runner.hpp).
#pragma once

#include <stdexcept>
#include <string>

namespace simdyn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values: out-of-range symbols, points outside [0,1], etc.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Enumeration or quadrature would exceed the configured work budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Per-map potential lists whose length differs from the family size.
class LengthMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

// A computed leading eigenfunction has non-positive entries; the grid is
// usually too coarse for the potential.
class NonPositiveEigenfunction : public Error {
 public:
  using Error::Error;
};

// Integer overflow while forming slope products of long words.
class Overflow : public Error {
 public:
  using Error::Error;
};

// An iterative solver ran out of iterations before meeting its tolerance.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

// A hypothesis that the experiment relies on does not hold
// (no sign change for the kappa equation, degenerate Diophantine ratio, ...).
class HypothesisFailure : public Error {
 public:
  using Error::Error;
};

// A fit or diagnostic did not receive enough usable data points.
class TooFewPoints : public HypothesisFailure {
 public:
  using HypothesisFailure::HypothesisFailure;
};

// The ratio of ergodic-sum differences has a vanishing denominator.
class DegenerateDenominator : public HypothesisFailure {
 public:
  using HypothesisFailure::HypothesisFailure;
};

// A statistic requires a mean-zero observable.
class NotMeanZero : public DomainError {
 public:
  using DomainError::DomainError;
};

// Malformed experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace simdyn
