#pragma once

#include <stdexcept>
#include <string>

namespace oconnell {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument: outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Valid mathematically, but outside what this library implements.
struct CapabilityError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  double best_estimate;
  double achieved_bound;
  ConvergenceError(const std::string& what, double best, double bound)
      : Error(what), best_estimate(best), achieved_bound(bound) {}
};

// Monte Carlo estimator without usable samples.
struct EstimationError : Error {
  using Error::Error;
};

// Path integrator gave up (step rejection depth exceeded).
struct IntegrationError : Error {
  using Error::Error;
};

}  // namespace oconnell
