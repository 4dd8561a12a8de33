#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "critkill/core_model.hpp"

namespace critkill {

// Finite grid realization of the killed regional generator on the unit
// interval: n cells of width h = 1/(n+1) centered at x_i = (i+1) h.
struct GridModel {
  int n = 0;
  double h = 0.0;
  double alpha = 0.0;
  std::vector<double> xs;     // cell centers
  Eigen::MatrixXd generator;  // Q_U: jump rates off-diagonal, killed diagonal
};

// Midpoint discretization of the jump kernel A(1,-alpha)|x-y|^{-1-alpha} on
// (0,1); diagonal = -(row jump mass) - kappa_U(x_i), with kappa_U the exact
// complement-killing density of the interval.
GridModel build_generator(int n, double alpha);

// Critical boundary potential sampled at the cell centers:
// C(1,alpha,alpha/2) min(x, 1-x)^{-alpha}, C(1,alpha,alpha/2) = A(1,-alpha)/alpha.
std::vector<double> critical_kappa_vec(const GridModel& model);

// exp(t (Q_U - diag(kappa_vec))) by scaling-and-squaring Pade.
Eigen::MatrixXd semigroup(const GridModel& model,
                          const std::vector<double>& kappa_vec, double t);

struct DuhamelSeries {
  // terms[k] approximates p^k(t); signs alternate, terms[0] = exp(t Q_U)
  std::vector<Eigen::MatrixXd> terms;
  std::vector<Eigen::MatrixXd> partials;  // partials[k] = sum of terms 0..k
  int panels = 0;             // time panels at which the doubling stopped
  double last_term_norm = 0.0;
};

// Time-convolution recursion p^k(t) = -int_0^t p^0(s) diag(kappa) p^{k-1}(t-s) ds
// on a uniform grid, composite Simpson per prefix, panels doubled (with one
// Richardson step) until successive S_K values agree to 1e-10. Stops adding
// terms early once a term's max entry falls below 1e-13.
DuhamelSeries duhamel_series(const GridModel& model,
                             const std::vector<double>& kappa_vec, double t,
                             int K);

// Discrete Kato functional: sup over grid x of
//   sum_{z: delta(z) > max(a t^{1/alpha}, interior_cut)} kappa(z) h int_0^t q~(s,x,z) ds,
// with the comparison kernel's time integral in closed form and the
// on-diagonal cell regularized through rho_eff = max(|x-z|, h/2).
double kato_functional(const GridModel& model,
                       const std::vector<double>& kappa_vec, double a,
                       double t, double interior_cut = 0.0);

struct ThreePResult {
  double empirical_c = 0.0;   // max of LHS/RHS over the sampled tuples
  long violation_count = 0;   // non-finite ratios encountered
};

// Samples tuples (s < t <= 1, x, y, z in [-1,1]^d) and evaluates
//   q~(s,x,z) q~(t-s,z,y) / (q~(t,x,y) (q~(s,x,z) + q~(t-s,z,y))).
ThreePResult three_p_check(const StableParams& params, long n_samples,
                           std::uint64_t seed, int workers = 1);

}  // namespace critkill
