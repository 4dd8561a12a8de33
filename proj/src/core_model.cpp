#include "critkill/core_model.hpp"

#include <algorithm>

namespace critkill {

bool Domain::contains(const Vec& x) const {
  switch (kind) {
    case Kind::WholeSpace:
      return true;
    case Kind::HalfSpace:
      return !x.empty() && x.back() > 0.0;
    case Kind::Ball: {
      if (x.size() != center.size())
        throw InputError("Domain::contains: dimension mismatch");
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double dcomp = x[i] - center[i];
        s += dcomp * dcomp;
      }
      return s < radius * radius;
    }
    case Kind::PuncturedSpace:
      return norm2(x) > 0.0;
  }
  return false;
}

double dist_to_boundary(const Domain& domain, const Vec& x) {
  switch (domain.kind) {
    case Domain::Kind::WholeSpace:
      return std::numeric_limits<double>::infinity();
    case Domain::Kind::HalfSpace:
      if (x.empty()) throw InputError("dist_to_boundary: empty point");
      return std::max(x.back(), 0.0);
    case Domain::Kind::Ball: {
      if (x.size() != domain.center.size())
        throw InputError("dist_to_boundary: dimension mismatch");
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double dcomp = x[i] - domain.center[i];
        s += dcomp * dcomp;
      }
      return std::max(domain.radius - std::sqrt(s), 0.0);
    }
    case Domain::Kind::PuncturedSpace:
      return norm2(x);
  }
  return 0.0;
}

double kappa_of(const KillingPotential& pot, const Domain& domain, const Vec& x) {
  double dist;
  if (pot.geometry == KillingPotential::Geometry::OriginDistance) {
    dist = norm2(x);
  } else {
    if (domain.kind == Domain::Kind::WholeSpace) return 0.0;  // no boundary
    dist = dist_to_boundary(domain, x);
  }
  if (pot.C1 == 0.0 && pot.C2 == 0.0) return 0.0;
  if (dist == 0.0)
    throw SingularityError("kappa_of: point on the singular set");
  if (!std::isfinite(dist)) return 0.0;

  double base = pot.C1 * std::pow(dist, -pot.alpha);
  if (pot.C2 == 0.0) return base;  // exact critical potential, no clamping

  double shape = pot.perturbation ? pot.perturbation(x) : 1.0;
  shape = std::clamp(shape, -1.0, 1.0);
  return std::max(0.0, base + pot.C2 * std::pow(dist, -pot.eta) * shape);
}

double tilde_q(const StableParams& params, const ScalingFunction& phi,
               const VolumeModel& vol, double t, const Vec& x, const Vec& y) {
  if (!(t > 0.0)) throw InputError("tilde_q: t must be > 0");
  if (x.size() != y.size()) throw InputError("tilde_q: dimension mismatch");
  if (static_cast<int>(x.size()) != params.d)
    throw InputError("tilde_q: point dimension does not match params");

  double on_diag = 1.0 / vol.ball(phi.inverse(t));
  double rho = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dcomp = x[i] - y[i];
    rho += dcomp * dcomp;
  }
  rho = std::sqrt(rho);
  if (rho == 0.0) return on_diag;
  double off_diag = t / (vol.ball(rho) * phi(rho));
  return std::min(on_diag, off_diag);
}

}  // namespace critkill
