#pragma once

#include "critkill/core_model.hpp"
#include "critkill/quadrature.hpp"

namespace critkill {

// Quadrature-backed value with its accumulated error estimate.
struct ConstResult {
  double value = 0.0;
  double err_estimate = 0.0;
  operator double() const { return value; }
};

// Surface measure of the unit sphere S^{k-1} in R^k; sphere_surface(1) = 2.
double sphere_surface(int k);

// Jump amplitude A(d,-alpha) = alpha 2^{alpha-1} pi^{-d/2}
//   Gamma((d+alpha)/2) / Gamma(1-alpha/2), evaluated in log space.
double amplitude(const StableParams& params);

// gamma(alpha,p) = int_0^1 (t^p - 1)(1 - t^{alpha-p-1}) (1-t)^{-1-alpha} dt,
// for p in (-1, alpha). Vanishes at p = 0 and p = alpha-1, equals 1/alpha at
// p = alpha/2, symmetric under p <-> alpha-1-p.
ConstResult gamma_boundary(double alpha, double p,
                           const QuadratureConfig& cfg = {});

// Boundary-family constant for d >= 2:
//   C(d,alpha,p) = A(d,-alpha) (|S^{d-2}|/2) B((alpha+1)/2,(d-1)/2) gamma(alpha,p).
ConstResult c_boundary(const StableParams& params, double p,
                       const QuadratureConfig& cfg = {});

// One-dimensional analog A(1,-alpha) gamma(alpha,p). Experimental: the main
// derivation assumes d >= 2 and this constant is only stated in passing.
ConstResult c_boundary_line(double alpha, double p,
                            const QuadratureConfig& cfg = {});

// Inverse of p -> C(d,alpha,p) on the increasing branch [max(alpha-1,0), alpha).
// C1 = 0 requires alpha > 1 and returns alpha-1 exactly.
double invert_c_boundary(const StableParams& params, double C1,
                         const QuadratureConfig& cfg = {});

// Angular profile H(s), s >= 1, d >= 2:
//   H(s) = |S^{d-2}| int_0^pi sin^{d-2}t (sqrt(s^2-sin^2 t)+cos t)^{1+alpha}
//          / sqrt(s^2-sin^2 t) dt.
// Grows like s^alpha; positive and continuous down to s = 1.
ConstResult h_profile(const StableParams& params, double s,
                      const QuadratureConfig& cfg = {});

// Origin-family constant for d >= 2, p in (0, alpha):
//   C~(alpha,d,p) = A(d,-alpha) int_1^inf (s^p-1)(1-s^{alpha-p-d})
//                   s (s^2-1)^{-1-alpha} H(s) ds.
// Strictly increasing in p, -> 0 as p -> 0, -> infinity as p -> alpha.
ConstResult c_origin(const StableParams& params, double p,
                     const QuadratureConfig& cfg = {});

// Inverse of p -> C~(alpha,d,p) on (0, alpha); C1 must be positive.
double invert_c_origin(const StableParams& params, double C1,
                       const QuadratureConfig& cfg = {});

}  // namespace critkill
