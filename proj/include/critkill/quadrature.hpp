#pragma once

#include <functional>
#include <vector>

#include "critkill/errors.hpp"

namespace critkill {

struct QuadratureConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;
};

struct QuadResult {
  double value = 0.0;
  double err_estimate = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

using Integrand = std::function<double(double)>;

// Adaptive Gauss-Kronrod on [a,b]. Worst-panel-first refinement with a
// deterministic tie-break, so results are bitwise reproducible.
QuadResult integrate(const Integrand& f, double a, double b,
                     const QuadratureConfig& cfg = {});

// Same, but the interval is pre-split at the given breakpoints (values
// outside (a,b) are ignored). Use when the integrand has known kinks.
QuadResult integrate_points(const Integrand& f, double a, double b,
                            std::vector<double> breakpoints,
                            const QuadratureConfig& cfg = {});

// Substitution order m = ceil(3/(1+sigma)) that turns an integrable algebraic
// endpoint singularity t^sigma (sigma > -1) into a C^2 integrand.
int taming_order(double sigma);

// Integral over [a,b] of f with algebraic behavior (t-a)^sigma at the left
// endpoint: substitutes t = a + (b-a) v^m before integrating.
QuadResult integrate_power_tamed(const Integrand& f, double a, double b,
                                 double sigma, const QuadratureConfig& cfg = {});

// Integral over [w0, infinity) of f decaying like w^{-decay}, decay > 1.
// Maps the tail onto (0,1] via w = w0 * tau^{-1/(decay-1)}.
QuadResult integrate_tail(const Integrand& f, double w0, double decay,
                          const QuadratureConfig& cfg = {});

}  // namespace critkill
