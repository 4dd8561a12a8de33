#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "critkill/errors.hpp"

namespace critkill {

using Vec = std::vector<double>;

inline double norm2(const Vec& x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

struct StableParams {
  int d = 1;        // spatial dimension
  double alpha = 1; // stability index, in (0,2)

  StableParams() = default;
  StableParams(int d_, double alpha_) : d(d_), alpha(alpha_) { validate(); }

  void validate() const {
    if (d < 1) throw InputError("StableParams: d must be >= 1");
    if (!(alpha > 0.0 && alpha < 2.0))
      throw InputError("StableParams: alpha must lie in (0,2)");
  }
};

// Power-law scaling profile r -> r^exponent together with its declared
// weak-scaling witnesses a_l (R/r)^{delta_l} <= Phi(R)/Phi(r) <= a_u (R/r)^{delta_u}.
struct ScalingFunction {
  double exponent = 1.0;
  double delta_l = 1.0, delta_u = 1.0;
  double a_l = 1.0, a_u = 1.0;

  static ScalingFunction power_law(double e) {
    if (!(e > 0.0)) throw InputError("ScalingFunction: exponent must be > 0");
    return ScalingFunction{e, e, e, 1.0, 1.0};
  }
  double operator()(double r) const { return std::pow(r, exponent); }
  double inverse(double t) const { return std::pow(t, 1.0 / exponent); }
};

// Lebesgue-type volume: V(x,r) = v_d r^d, independent of x.
struct VolumeModel {
  int d = 1;
  double v_d = 2.0;  // measure of the unit ball

  static VolumeModel lebesgue(int d) {
    if (d < 1) throw InputError("VolumeModel: d must be >= 1");
    double vd = std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
    return VolumeModel{d, vd};
  }
  double ball(double r) const { return v_d * std::pow(r, d); }
};

struct Domain {
  enum class Kind { WholeSpace, HalfSpace, Ball, PuncturedSpace };

  Kind kind = Kind::WholeSpace;
  Vec center;          // Ball only
  double radius = 0.0; // Ball only
  // descriptive fatness metadata (R1, kappa); never used in computation
  std::optional<std::pair<double, double>> fatness;

  static Domain whole_space() { return Domain{Kind::WholeSpace, {}, 0.0, {}}; }
  static Domain half_space() { return Domain{Kind::HalfSpace, {}, 0.0, {}}; }
  static Domain punctured() { return Domain{Kind::PuncturedSpace, {}, 0.0, {}}; }
  static Domain ball(Vec center, double radius) {
    if (!(radius > 0.0)) throw InputError("Domain: ball radius must be > 0");
    return Domain{Kind::Ball, std::move(center), radius, {}};
  }

  bool contains(const Vec& x) const;  // interior membership
};

double dist_to_boundary(const Domain& domain, const Vec& x);

// Killing potential of Hardy type: kappa(x) = C1 dist^{-alpha} + C2 dist^{-eta} b(x)
// with |b| <= 1, where dist is the boundary distance or |x| per `geometry`.
// Class membership (the two-sided sandwich near the singular set and the
// far-field bound) holds with far-field constant C1 + C2; see kappa_of.
struct KillingPotential {
  enum class Geometry { BoundaryDistance, OriginDistance };

  Geometry geometry = Geometry::BoundaryDistance;
  double alpha = 1.0;  // order of the critical term, matches the process index
  double C1 = 0.0;     // critical amplitude
  double C2 = 0.0;     // perturbation size
  double eta = 0.0;    // perturbation order, in [0, alpha)
  // bounded perturbation shape, |perturbation(x)| <= 1; only read when C2 > 0;
  // absent handle means the constant shape 1
  std::function<double(const Vec&)> perturbation;

  static KillingPotential zero() { return KillingPotential{}; }
  static KillingPotential critical_boundary(double alpha, double C1) {
    return KillingPotential{Geometry::BoundaryDistance, alpha, C1, 0.0, 0.0, {}};
  }
  static KillingPotential critical_origin(double alpha, double C1) {
    return KillingPotential{Geometry::OriginDistance, alpha, C1, 0.0, 0.0, {}};
  }
};

double kappa_of(const KillingPotential& pot, const Domain& domain, const Vec& x);

// Comparison kernel: min of the on-diagonal and off-diagonal branches,
//   q~(t,x,y) = 1/V(x, Phi^{-1}(t))  ∧  t / (V(x, rho) Phi(rho)),  rho = |x-y|.
double tilde_q(const StableParams& params, const ScalingFunction& phi,
               const VolumeModel& vol, double t, const Vec& x, const Vec& y);

// Nonlocal kernel perturbation B(x,y) = A(d,-alpha) + |x-y|^{alpha-beta} b(x,y).
// Pure data; the amplitude A(d,-alpha) is supplied by the caller.
struct NonlocalPerturbation {
  double beta = 0.0;  // perturbation order, < alpha, may be negative
  std::function<double(const Vec&, const Vec&)> b;  // symmetric, bounded
  double Cb1 = 0.0;   // |b| bound
  double Cb2 = 0.0;   // lower bound on B
  double Cb3 = 0.0;   // Hoelder constant of b(x,.) at the diagonal
  double beta1 = 1.0; // Hoelder order, > 0
};

}  // namespace critkill
