#pragma once

#include <stdexcept>
#include <string>

namespace critkill {

// invalid argument values (out-of-range parameters, dimension mismatch)
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// evaluation requested at a point where the quantity is singular
struct SingularityError : std::domain_error {
  using std::domain_error::domain_error;
};

// a numerical routine failed to reach its declared tolerance
struct NumericError : std::runtime_error {
  double residual;
  explicit NumericError(const std::string& what, double residual_ = 0.0)
      : std::runtime_error(what), residual(residual_) {}
};

// a Monte Carlo estimator could not produce a usable estimate
struct EstimatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace critkill
