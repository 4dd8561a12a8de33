#include "critkill/flap.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "critkill/constants.hpp"
#include "critkill/errors.hpp"

namespace critkill {
namespace {

constexpr double kHalfPi = 1.57079632679489661923;

double require_ok(const QuadResult& q, const char* what) {
  if (!q.converged)
    throw NumericError(std::string(what) + ": quadrature did not converge",
                       q.err_estimate);
  return q.value;
}

// tighter tolerances for the angular stage so its noise stays below what the
// radial stage is asked to resolve; the relative floor reflects what rounding
// of the pencil offsets leaves attainable next to a barrier divergence
QuadratureConfig angular_cfg(const QuadratureConfig& quad) {
  return {std::max(quad.abs_tol * 1e-2, 3e-10),
          std::max(quad.rel_tol * 1e-2, 1e-9), quad.max_subdivisions};
}

// sum over the unit sphere of the paired pencil integrand g(cos phi, sin phi),
// phi the polar angle against the problem axis, folded onto [0, pi/2]
double angular(int d, const std::function<double(double, double)>& g,
               std::vector<double> breaks, const QuadratureConfig& cfg) {
  auto f = [d, &g](double phi) {
    double c = std::cos(phi), sn = std::sin(phi);
    double wgt = d == 2 ? 1.0 : std::pow(sn, double(d - 2));
    return wgt * g(c, sn);
  };
  QuadResult q = integrate_points(f, 0.0, kHalfPi, std::move(breaks), cfg);
  return sphere_surface(d - 1) * require_ok(q, "angular reduction");
}

void push_if_inside(std::vector<double>& breaks, double lo, double hi,
                    double v) {
  if (v > lo && v < hi) breaks.push_back(v);
}

// radial profile of a principal-value pencil problem:
//   value = int_0^inf w^{-1-ord} omega(w) dw, omega(w) = A w^2 + O(w^4) near 0
struct PencilSpec {
  double ord = 0.0;                     // kernel order, < 2
  std::function<double(double)> omega;  // paired angular reduction at radius w
  std::vector<double> w_breaks;         // kinks of omega
  double upper = 0.0;                   // exact upper limit; 0 means infinite
  double tail_decay = 0.0;              // decay of the integrand, upper == 0
};

double pv_radial(const PencilSpec& spec, double inner_cut, double outer_cut,
                 const QuadratureConfig& quad, double* err_acc) {
  // Taylor head on [0, wa]: fit omega ~ A w^2 + B w^4 at wa and wa/2, then
  // integrate the model against w^{-1-ord} in closed form
  double wa = inner_cut / 256.0;
  double q1 = spec.omega(wa) / (wa * wa);
  double q2 = spec.omega(0.5 * wa) / (0.25 * wa * wa);
  double coef_b = (q1 - q2) / (0.75 * wa * wa);
  double coef_a = q2 - coef_b * 0.25 * wa * wa;
  double head = coef_a * std::pow(wa, 2.0 - spec.ord) / (2.0 - spec.ord) +
                coef_b * std::pow(wa, 4.0 - spec.ord) / (4.0 - spec.ord);

  auto f = [&spec](double w) {
    return std::pow(w, -1.0 - spec.ord) * spec.omega(w);
  };
  double upper = spec.upper > 0.0 ? spec.upper : outer_cut;
  QuadResult mid = integrate_points(f, wa, upper, spec.w_breaks, quad);
  double value = head + require_ok(mid, "radial profile");
  *err_acc += mid.err_estimate;

  if (spec.upper <= 0.0) {
    QuadResult tail = integrate_tail(f, upper, spec.tail_decay, quad);
    value += require_ok(tail, "radial tail");
    *err_acc += tail.err_estimate;
  }
  return value;
}

// run the radial stage at inner_cut and inner_cut/2; the difference is the
// built-in Richardson probe of the Taylor head
PVResult run_pv(const PencilSpec& spec, double inner_cut, double outer_cut,
                const QuadratureConfig& quad) {
  double e1 = 0.0, e2 = 0.0;
  double v1 = pv_radial(spec, inner_cut, outer_cut, quad, &e1);
  double v2 = pv_radial(spec, 0.5 * inner_cut, outer_cut, quad, &e2);
  return {v2, e2 + std::abs(v2 - v1), v2 - v1};
}

// fill in defaults and validate; smooth_radius is the distance from x to the
// nearest kink of the integrand, below which the paired expansion is valid
void resolve_cuts(PVConfig& cfg, double smooth_radius, double x_norm) {
  if (cfg.inner_cut <= 0.0) cfg.inner_cut = 0.25 * smooth_radius;
  if (cfg.outer_cut <= 0.0) cfg.outer_cut = 1e3 * std::max(1.0, x_norm);
  if (!(cfg.inner_cut > 0.0) || !(cfg.inner_cut < cfg.outer_cut))
    throw InputError("PVConfig: need 0 < inner_cut < outer_cut");
  if (cfg.inner_cut > 0.5 * smooth_radius)
    throw InputError("PVConfig: inner_cut exceeds the smooth pairing radius");
}

// pencil through a half-space barrier y -> (y_d)^p from x = (0, z), kernel
// order ord, truncated at `upper` when positive
PencilSpec half_space_pencil(int d, double ord, double z, double p,
                             double upper, const QuadratureConfig& ang) {
  PencilSpec spec;
  spec.ord = ord;
  spec.upper = upper;
  spec.tail_decay = 1.0 + ord - std::max(p, 0.0);
  spec.w_breaks = {z};
  double zp = std::pow(z, p);
  spec.omega = [d, z, p, zp, ang](double w) {
    auto g = [z, p, zp, w](double c, double) {
      double acc = std::pow(z + w * c, p) - zp;
      double ym = z - w * c;
      if (ym > 0.0) acc += std::pow(ym, p) - zp;
      return acc;
    };
    std::vector<double> breaks;
    if (w > z) push_if_inside(breaks, 0.0, kHalfPi, std::acos(z / w));
    return angular(d, g, std::move(breaks), ang);
  };
  return spec;
}

// squared distances to the ball center from the paired pencil points
inline double n_plus(double rho, double w, double c, double s) {
  double a = rho + w * c;
  return a * a + w * w * s * s;
}
inline double n_minus(double rho, double w, double c, double s) {
  double a = rho - w * c;
  return a * a + w * w * s * s;
}

// angle breakpoints where the pencil points cross the sphere |y - c| = R
std::vector<double> ball_angle_breaks(double rho, double R, double w) {
  std::vector<double> breaks;
  if (rho <= 0.0 || w <= 0.0) return breaks;
  double cp = (R * R - rho * rho - w * w) / (2.0 * rho * w);
  double cm = (rho * rho + w * w - R * R) / (2.0 * rho * w);
  if (cp > -1.0 && cp < 1.0)
    push_if_inside(breaks, 0.0, kHalfPi, std::acos(cp));
  if (cm > -1.0 && cm < 1.0)
    push_if_inside(breaks, 0.0, kHalfPi, std::acos(cm));
  return breaks;
}

}  // namespace

PVResult half_space_identity_lhs(const StableParams& params, double p,
                                 double z_d, PVConfig cfg) {
  params.validate();
  if (params.d < 2)
    throw InputError("half_space_identity_lhs: reduction requires d >= 2");
  if (!(p > -1.0 && p < params.alpha))
    throw InputError("half_space_identity_lhs: p must lie in (-1, alpha)");
  if (!(z_d > 0.0))
    throw InputError("half_space_identity_lhs: z_d must be > 0");
  resolve_cuts(cfg, z_d, z_d);

  PencilSpec spec = half_space_pencil(params.d, params.alpha, z_d, p, 0.0,
                                      angular_cfg(cfg.quad));
  PVResult r = run_pv(spec, cfg.inner_cut, cfg.outer_cut, cfg.quad);
  double amp = amplitude(params);
  r.value *= amp;
  r.err_estimate *= amp;
  r.richardson_diff *= amp;
  return r;
}

PVResult whole_space_power_lhs(const StableParams& params, double p, double r,
                               PVConfig cfg) {
  params.validate();
  if (params.d < 2)
    throw InputError("whole_space_power_lhs: reduction requires d >= 2");
  if (!(p > 0.0 && p < params.alpha))
    throw InputError("whole_space_power_lhs: p must lie in (0, alpha)");
  if (!(r > 0.0)) throw InputError("whole_space_power_lhs: r must be > 0");
  resolve_cuts(cfg, r, r);

  PencilSpec spec;
  spec.ord = params.alpha;
  spec.tail_decay = 1.0 + params.alpha - p;
  spec.w_breaks = {r};  // the barrier |y|^p has a kink at y = 0
  double rp = std::pow(r, p);
  QuadratureConfig ang = angular_cfg(cfg.quad);
  int d = params.d;
  spec.omega = [d, r, p, rp, ang](double w) {
    auto g = [r, p, rp, w](double c, double s) {
      return std::pow(n_plus(r, w, c, s), 0.5 * p) +
             std::pow(n_minus(r, w, c, s), 0.5 * p) - 2.0 * rp;
    };
    return angular(d, g, {}, ang);
  };

  PVResult res = run_pv(spec, cfg.inner_cut, cfg.outer_cut, cfg.quad);
  double amp = amplitude(params);
  res.value *= amp;
  res.err_estimate *= amp;
  res.richardson_diff *= amp;
  return res;
}

PVResult killing_density(const Domain& domain, const StableParams& params,
                         const Vec& x, PVConfig cfg) {
  params.validate();
  if (int(x.size()) != params.d)
    throw InputError("killing_density: point dimension mismatch");
  double alpha = params.alpha;
  double amp = amplitude(params);

  if (domain.kind == Domain::Kind::WholeSpace ||
      domain.kind == Domain::Kind::PuncturedSpace)
    return {0.0, 0.0, 0.0};  // complement is empty or a null set

  if (!domain.contains(x))
    throw SingularityError(
        "killing_density: point is not in the interior of the domain");

  if (domain.kind == Domain::Kind::HalfSpace) {
    double h = x.back();
    if (params.d == 1)  // half line: exact
      return {amp * std::pow(h, -alpha) / alpha, 0.0, 0.0};
    if (cfg.outer_cut <= 0.0) cfg.outer_cut = 1e3 * std::max(1.0, h);
    int d = params.d;
    QuadratureConfig ang = angular_cfg(cfg.quad);
    // only the downward pencil point can leave, at angles below acos(h/w)
    auto omega_c = [d, h, ang](double w) {
      if (w <= h) return 0.0;
      double phi = std::acos(std::min(1.0, h / w));
      auto g = [h, w](double c, double) { return w * c >= h ? 1.0 : 0.0; };
      std::vector<double> breaks;
      push_if_inside(breaks, 0.0, kHalfPi, phi);
      return angular(d, g, std::move(breaks), ang);
    };
    auto f = [&omega_c, alpha](double w) {
      return std::pow(w, -1.0 - alpha) * omega_c(w);
    };
    // omega_c vanishes like (w-h)^{(d-1)/2} at the contact radius
    QuadResult near = integrate_power_tamed(f, h, 2.0 * h, 0.5 * (d - 1),
                                            cfg.quad);
    QuadResult far = integrate(f, 2.0 * h, cfg.outer_cut, cfg.quad);
    QuadResult tail = integrate_tail(f, cfg.outer_cut, 1.0 + alpha, cfg.quad);
    double value = require_ok(near, "killing_density near") +
                   require_ok(far, "killing_density far") +
                   require_ok(tail, "killing_density tail");
    double err = near.err_estimate + far.err_estimate + tail.err_estimate;
    return {amp * value, amp * err, 0.0};
  }

  // ball
  double R = domain.radius;
  Vec rel(x.size());
  for (size_t i = 0; i < x.size(); ++i)
    rel[i] = x[i] - (domain.center.empty() ? 0.0 : domain.center[i]);
  double rho = norm2(rel);
  if (params.d == 1)  // interval: exact
    return {kappa_interval(alpha, -R, R, rho == 0.0 ? 0.0 : rel[0]), 0.0, 0.0};
  double full = sphere_surface(params.d);
  if (rho == 0.0)  // exact: complement seen identically past radius R
    return {amp * full * std::pow(R, -alpha) / alpha, 0.0, 0.0};

  int d = params.d;
  QuadratureConfig ang = angular_cfg(cfg.quad);
  auto omega_c = [d, rho, R, ang](double w) {
    double RR = R * R;
    auto g = [rho, R, RR, w](double c, double s) {
      double acc = 0.0;
      if (n_plus(rho, w, c, s) >= RR) acc += 1.0;
      if (n_minus(rho, w, c, s) >= RR) acc += 1.0;
      return acc;
    };
    return angular(d, g, ball_angle_breaks(rho, R, w), ang);
  };
  auto f = [&omega_c, alpha](double w) {
    return std::pow(w, -1.0 - alpha) * omega_c(w);
  };
  double delta = R - rho;
  double mid_break = std::sqrt(R * R - rho * rho);
  double near_end = std::min(2.0 * delta, mid_break);
  QuadResult near = integrate_power_tamed(f, delta, near_end, 0.5 * (d - 1),
                                          cfg.quad);
  QuadResult rest = integrate_points(f, near_end, R + rho, {mid_break},
                                     cfg.quad);
  // past R + rho the whole sphere lies in the complement: exact tail
  double tail = full * std::pow(R + rho, -alpha) / alpha;
  double value = require_ok(near, "killing_density near") +
                 require_ok(rest, "killing_density shell") + tail;
  return {amp * value, amp * (near.err_estimate + rest.err_estimate), 0.0};
}

PVResult regional_barrier(const Domain& domain, const StableParams& params,
                          const KillingPotential& pot, double q, const Vec& x,
                          PVConfig cfg) {
  params.validate();
  if (params.d < 2)
    throw InputError("regional_barrier: reduction requires d >= 2");
  if (int(x.size()) != params.d)
    throw InputError("regional_barrier: point dimension mismatch");
  if (!(q > 0.0 && q < params.alpha))
    throw InputError("regional_barrier: q must lie in (0, alpha)");
  if (!domain.contains(x))
    throw SingularityError(
        "regional_barrier: point is not in the interior of the domain");

  double alpha = params.alpha;
  double delta = dist_to_boundary(domain, x);
  QuadratureConfig ang = angular_cfg(cfg.quad);
  PVResult pv;

  if (domain.kind == Domain::Kind::HalfSpace) {
    double z = x.back();
    resolve_cuts(cfg, z, norm2(x));
    PencilSpec spec = half_space_pencil(params.d, alpha, z, q, 0.0, ang);
    pv = run_pv(spec, cfg.inner_cut, cfg.outer_cut, cfg.quad);
  } else if (domain.kind == Domain::Kind::Ball) {
    double R = domain.radius;
    Vec rel(x.size());
    for (size_t i = 0; i < x.size(); ++i)
      rel[i] = x[i] - (domain.center.empty() ? 0.0 : domain.center[i]);
    double rho = norm2(rel);
    if (rho == 0.0)
      throw InputError(
          "regional_barrier: barrier has a cone kink at the ball center");
    resolve_cuts(cfg, std::min(delta, rho), norm2(x));

    PencilSpec spec;
    spec.ord = alpha;
    spec.upper = R + rho;  // jumps restricted to the ball
    spec.w_breaks = {delta, rho, std::sqrt(R * R - rho * rho)};
    double hx = std::pow(delta, q);
    int d = params.d;
    spec.omega = [d, rho, R, q, hx, ang](double w) {
      double RR = R * R;
      auto g = [rho, R, RR, q, hx, w](double c, double s) {
        double acc = 0.0;
        double np = n_plus(rho, w, c, s);
        // R - |y - c| via its conjugate form, stable near the sphere
        if (np < RR) acc += std::pow((RR - np) / (R + std::sqrt(np)), q) - hx;
        double nm = n_minus(rho, w, c, s);
        if (nm < RR) acc += std::pow((RR - nm) / (R + std::sqrt(nm)), q) - hx;
        return acc;
      };
      return angular(d, g, ball_angle_breaks(rho, R, w), ang);
    };
    pv = run_pv(spec, cfg.inner_cut, cfg.outer_cut, cfg.quad);
  } else {
    throw InputError("regional_barrier: domain must be a half-space or ball");
  }

  double amp = amplitude(params);
  double kappa = kappa_of(pot, domain, x);
  pv.value = amp * pv.value - kappa * std::pow(delta, q);
  pv.err_estimate *= amp;
  pv.richardson_diff *= amp;
  return pv;
}

PVResult truncated_operator(const StableParams& params, double beta,
                            double lambda, double p, double x_d,
                            PVConfig cfg) {
  params.validate();
  if (params.d < 2)
    throw InputError("truncated_operator: reduction requires d >= 2");
  if (!(beta < 2.0)) throw InputError("truncated_operator: beta must be < 2");
  if (!(lambda > 0.0))
    throw InputError("truncated_operator: lambda must be > 0");
  if (!(p > 0.0)) throw InputError("truncated_operator: p must be > 0");
  if (!(x_d > 0.0)) throw InputError("truncated_operator: x_d must be > 0");
  resolve_cuts(cfg, std::min(x_d, lambda), x_d);

  PencilSpec spec = half_space_pencil(params.d, beta, x_d, p, lambda,
                                      angular_cfg(cfg.quad));
  return run_pv(spec, cfg.inner_cut, cfg.outer_cut, cfg.quad);
}

double kappa_interval(double alpha, double a, double b, double x) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw InputError("kappa_interval: alpha must lie in (0,2)");
  if (!(a < b)) throw InputError("kappa_interval: need a < b");
  if (!(x > a && x < b))
    throw SingularityError("kappa_interval: x must lie inside (a, b)");
  double amp = amplitude(StableParams{1, alpha});
  return amp * (std::pow(x - a, -alpha) + std::pow(b - x, -alpha)) / alpha;
}

}  // namespace critkill
