#pragma once

#include "critkill/core_model.hpp"
#include "critkill/quadrature.hpp"

namespace critkill {

struct PVConfig {
  double inner_cut = 0.0;  // <= 0 selects min(dist to kinks)/4 per operator
  double outer_cut = 0.0;  // <= 0 selects 1e3 max(1, |x|)
  QuadratureConfig quad{1e-11, 3e-9, 2000};
};

struct PVResult {
  double value = 0.0;
  double err_estimate = 0.0;
  double richardson_diff = 0.0;  // change under halving inner_cut
  operator double() const { return value; }
};

// A(d,-alpha) PV int_{R^d_+} (y_d^p - z_d^p) |y-z|^{-d-alpha} dy at z=(0,z_d);
// should reproduce C(d,alpha,p) z_d^{p-alpha}.
PVResult half_space_identity_lhs(const StableParams& params, double p,
                                 double z_d, PVConfig cfg = {});

// A(d,-alpha) PV int_{R^d} (|y|^p - |x|^p) |y-x|^{-d-alpha} dy at |x|=r;
// should reproduce C~(alpha,d,p) r^{p-alpha}.
PVResult whole_space_power_lhs(const StableParams& params, double p, double r,
                               PVConfig cfg = {});

// kappa_D(x) = A(d,-alpha) int_{D^c} |y-x|^{-d-alpha} dy (convergent, no PV).
PVResult killing_density(const Domain& domain, const StableParams& params,
                         const Vec& x, PVConfig cfg = {});

// L h_q(x) = A(d,-alpha) PV int_D (delta_D(y)^q - delta_D(x)^q)
//            |y-x|^{-d-alpha} dy - kappa(x) delta_D(x)^q,
// the regional operator minus the killing term, for D half-space or ball.
PVResult regional_barrier(const Domain& domain, const StableParams& params,
                          const KillingPotential& pot, double q, const Vec& x,
                          PVConfig cfg = {});

// PV int_{R^d_+, |y-x|<lambda} (y_d^p - x_d^p) |y-x|^{-d-beta} dy at
// x=(0,x_d); no amplitude factor. beta < 2 may be nonpositive.
PVResult truncated_operator(const StableParams& params, double beta,
                            double lambda, double p, double x_d,
                            PVConfig cfg = {});

// Closed form of killing_density for the interval (a,b) in d=1:
// A(1,-alpha) ((x-a)^{-alpha} + (b-x)^{-alpha}) / alpha.
double kappa_interval(double alpha, double a, double b, double x);

}  // namespace critkill
