#include "critkill/constants.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace critkill {

namespace {

// expm1(x)/x, continuous through x = 0
double rexpm1(double x) { return x == 0.0 ? 1.0 : std::expm1(x) / x; }

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw InputError("constants: alpha must lie in (0,2)");
}

void require_converged(const QuadResult& q, const char* where) {
  if (!q.converged)
    throw NumericError(std::string(where) + ": quadrature did not converge",
                       q.err_estimate);
}

// 15-point Kronrod rule with the embedded 7-point Gauss rule; xk are the
// nonnegative nodes, wk the Kronrod weights, wg the Gauss weights mapped
// onto the same node indexing (zero on Kronrod-only nodes).
constexpr std::array<double, 8> kGkNode = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kGkWeightK = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 8> kGkWeightG = {
    0.0, 0.129484966168869693270611432679082,
    0.0, 0.279705391489276667901467771423780,
    0.0, 0.381830050505118944950369775488975,
    0.0, 0.417959183673469387755102040816327};

struct FixedNode {
  double x;   // abscissa in the integration variable
  double wk;  // Kronrod weight (panel halfwidth folded in)
  double wg;  // Gauss weight, 0 on Kronrod-only nodes
};

void append_panel_nodes(double a, double b, std::vector<FixedNode>& out) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (int i = 0; i < 7; ++i) {
    out.push_back({c - h * kGkNode[i], h * kGkWeightK[i], h * kGkWeightG[i]});
    out.push_back({c + h * kGkNode[i], h * kGkWeightK[i], h * kGkWeightG[i]});
  }
  out.push_back({c, h * kGkWeightK[7], h * kGkWeightG[7]});
}

// Chebyshev interpolant on [a,b] at n+1 extrema nodes, evaluated by Clenshaw.
struct ChebFit {
  double a = 0.0, b = 1.0;
  std::vector<double> coef;  // end coefficients already halved

  template <class F>
  static ChebFit build(const F& f, double a, double b, int n) {
    std::vector<double> fv(n + 1);
    for (int j = 0; j <= n; ++j)
      fv[j] = f(0.5 * (a + b) + 0.5 * (b - a) * std::cos(M_PI * j / n));
    ChebFit fit;
    fit.a = a;
    fit.b = b;
    fit.coef.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
      double s = 0.5 * (fv[0] + (k % 2 ? -1.0 : 1.0) * fv[n]);
      for (int j = 1; j < n; ++j) s += fv[j] * std::cos(M_PI * k * j / n);
      fit.coef[k] = 2.0 * s / n;
    }
    fit.coef[0] *= 0.5;
    fit.coef[n] *= 0.5;
    return fit;
  }

  double operator()(double x) const {
    double t = (2.0 * x - a - b) / (b - a);
    double b1 = 0.0, b2 = 0.0;
    for (int k = static_cast<int>(coef.size()) - 1; k >= 1; --k) {
      double b0 = 2.0 * t * b1 - b2 + coef[k];
      b2 = b1;
      b1 = b0;
    }
    return t * b1 - b2 + coef[0];
  }
};

// ---- angular profile -------------------------------------------------------

// H(1+e) through the split theta = pi/2 -+ u, with s^2 - sin^2 theta
// rewritten as e(2+e) + sin^2 u so nothing cancels as e -> 0.
ConstResult h_profile_eps(const StableParams& params, double e,
                          const QuadratureConfig& cfg) {
  const int d = params.d;
  const double alpha = params.alpha;
  const double E = e * (2.0 + e);
  auto lo = [=](double u) {
    double su = std::sin(u);
    double root = std::sqrt(E + su * su);
    double ang = d == 2 ? 1.0 : std::pow(std::cos(u), d - 2);
    return ang * std::pow(root + su, 1.0 + alpha) / root;
  };
  auto hi = [=](double u) {
    double su = std::sin(u);
    double root = std::sqrt(E + su * su);
    double ang = d == 2 ? 1.0 : std::pow(std::cos(u), d - 2);
    return ang * std::pow(E / (root + su), 1.0 + alpha) / root;
  };
  QuadResult ql = integrate_power_tamed(lo, 0.0, M_PI / 2, alpha, cfg);
  QuadResult qh = integrate_power_tamed(hi, 0.0, M_PI / 2, alpha, cfg);
  require_converged(ql, "h_profile");
  require_converged(qh, "h_profile");
  double pref = sphere_surface(d - 1);
  return {pref * (ql.value + qh.value), pref * (ql.err_estimate + qh.err_estimate)};
}

// W(z) = H(1/z) z^alpha, analytic on [0,1); used for the far field.
ConstResult w_profile(const StableParams& params, double z,
                      const QuadratureConfig& cfg) {
  const int d = params.d;
  const double alpha = params.alpha;
  auto f = [=](double u) {
    double su = std::sin(u), cu = std::cos(u);
    double R = std::sqrt(1.0 - z * z * cu * cu);
    double gA = R + z * su;
    double gB = (1.0 - z * z) / gA;
    double ang = d == 2 ? 1.0 : std::pow(cu, d - 2);
    return ang * (std::pow(gA, 1.0 + alpha) + std::pow(gB, 1.0 + alpha)) / R;
  };
  QuadResult q = integrate(f, 0.0, M_PI / 2, cfg);
  require_converged(q, "w_profile");
  double pref = sphere_surface(d - 1);
  return {pref * q.value, pref * q.err_estimate};
}

// ---- origin family ---------------------------------------------------------

// Fixed evaluation pattern for C~(alpha,d,.): the expensive profile H is
// sampled once at p-independent nodes, after which every p costs only the
// cheap weight factors. Regions: s in (1, 1.5] via e = 0.5 v^m on dyadic
// v-panels, s in [1.5, 10] on a geometric Kronrod grid, s in [10, inf)
// via z = 1/s and a Chebyshev fit of the smooth part.
struct OriginProfile {
  StableParams params;
  double amp = 0.0;
  int m = 1;                    // taming order of the near substitution
  static constexpr double kE0 = 0.5;
  static constexpr double kZcut = 0.1;  // 1/s at the middle/far split

  struct NearNode {
    double e, s, H, jac;  // jac = m kE0 v^{m-1}
    double wk, wg;
  };
  std::vector<NearNode> near_nodes;

  struct MidNode {
    double s, q;  // q = s (s^2-1)^{-1-alpha} H(s)
    double wk, wg;
  };
  std::vector<MidNode> mid_nodes;

  ChebFit smooth_far;  // S(z) = (1-z^2)^{-1-alpha} W(z)
  double S0 = 0.0;     // S(0)

  explicit OriginProfile(const StableParams& p) : params(p) {
    const double alpha = params.alpha;
    amp = amplitude(params);
    m = taming_order(1.0 - alpha);
    QuadratureConfig hq{1e-13, 3e-12, 4000};

    std::vector<FixedNode> vn;
    for (int k = 0; k <= 16; ++k) {
      double hipt = std::ldexp(1.0, -k), mid = std::ldexp(0.75, -k);
      append_panel_nodes(hipt / 2, mid, vn);
      append_panel_nodes(mid, hipt, vn);
    }
    near_nodes.reserve(vn.size());
    for (const FixedNode& n : vn) {
      double e = kE0 * std::pow(n.x, m);
      double jac = m * kE0 * std::pow(n.x, m - 1);
      near_nodes.push_back(
          {e, 1.0 + e, h_profile_eps(params, e, hq).value, jac, n.wk, n.wg});
    }

    std::vector<FixedNode> sn;
    const double s_lo = 1.0 + kE0, s_hi = 1.0 / kZcut;
    const int mid_panels = 24;
    for (int i = 0; i < mid_panels; ++i) {
      double a = s_lo * std::pow(s_hi / s_lo, double(i) / mid_panels);
      double b = s_lo * std::pow(s_hi / s_lo, double(i + 1) / mid_panels);
      append_panel_nodes(a, b, sn);
    }
    mid_nodes.reserve(sn.size());
    for (const FixedNode& n : sn) {
      double H = h_profile_eps(params, n.x - 1.0, hq).value;
      double q = n.x * std::pow(n.x * n.x - 1.0, -1.0 - alpha) * H;
      mid_nodes.push_back({n.x, q, n.wk, n.wg});
    }

    auto S = [&](double z) {
      return std::pow(1.0 - z * z, -1.0 - alpha) * w_profile(params, z, hq).value;
    };
    smooth_far = ChebFit::build(S, 0.0, kZcut, 40);
    S0 = smooth_far(0.0);
  }

  // int_0^Zcut z^{c-1} S(z) dz, c > 0, with the divergent-at-small-c mass
  // S0 Zcut^c / c split off analytically so c -> 0 stays well conditioned.
  QuadResult moment(double c, const QuadratureConfig& cfg) const {
    auto f = [this, c](double z) {
      return std::pow(z, c - 1.0) * (smooth_far(z) - S0);
    };
    QuadResult q = integrate_power_tamed(f, 0.0, kZcut, std::min(c, 1.0), cfg);
    q.value += S0 * std::pow(kZcut, c) / c;
    return q;
  }

  ConstResult eval(double p, const QuadratureConfig& cfg) const {
    const double alpha = params.alpha;
    const int d = params.d;
    if (!(p > 0.0 && p < alpha))
      throw InputError("c_origin: p must lie in (0, alpha)");

    double near_k = 0.0, near_g = 0.0;
    for (const NearNode& n : near_nodes) {
      double L = std::log1p(n.e);
      double R1 = rexpm1(p * L);
      double R2 = rexpm1((alpha - p - d) * L);
      double Le = L / n.e;
      double core = p * (d + p - alpha) * R1 * R2 * Le * Le * n.s *
                    std::pow(2.0 + n.e, -1.0 - alpha) * n.H;
      double f = core * (std::exp((1.0 - alpha) * std::log(n.e)) * n.jac);
      near_k += n.wk * f;
      near_g += n.wg * f;
    }

    double mid_k = 0.0, mid_g = 0.0;
    for (const MidNode& n : mid_nodes) {
      double f = (std::pow(n.s, p) - 1.0) *
                 (1.0 - std::pow(n.s, alpha - p - d)) * n.q;
      mid_k += n.wk * f;
      mid_g += n.wg * f;
    }

    // far field in z = 1/s: the weight (1-z^p)(1-z^{p+d-alpha}) z^{alpha-p-1}
    // expands into four pure powers against the smooth part S(z)
    QuadResult m1 = moment(alpha - p, cfg);
    QuadResult m2 = moment(alpha, cfg);
    QuadResult m3 = moment(double(d), cfg);
    QuadResult m4 = moment(double(d) + p, cfg);
    require_converged(m1, "c_origin far field");
    require_converged(m2, "c_origin far field");
    require_converged(m3, "c_origin far field");
    require_converged(m4, "c_origin far field");
    double far = m1.value - m2.value - m3.value + m4.value;
    double far_err = m1.err_estimate + m2.err_estimate + m3.err_estimate +
                     m4.err_estimate;

    double value = amp * (near_k + mid_k + far);
    double err = amp * (std::fabs(near_k - near_g) + std::fabs(mid_k - mid_g) +
                        far_err);
    return {value, err};
  }
};

const OriginProfile& origin_profile(const StableParams& params) {
  static std::mutex mu;
  static std::map<std::pair<int, std::uint64_t>,
                  std::unique_ptr<OriginProfile>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(params.d, std::bit_cast<std::uint64_t>(params.alpha));
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<OriginProfile>(params)).first;
  return *it->second;
}

}  // namespace

double sphere_surface(int k) {
  if (k < 1) throw InputError("sphere_surface: k must be >= 1");
  return 2.0 * std::pow(M_PI, 0.5 * k) / std::tgamma(0.5 * k);
}

double amplitude(const StableParams& params) {
  params.validate();
  double lg = std::log(params.alpha) + (params.alpha - 1.0) * std::log(2.0) -
              0.5 * params.d * std::log(M_PI) +
              std::lgamma(0.5 * (params.d + params.alpha)) -
              std::lgamma(1.0 - 0.5 * params.alpha);
  return std::exp(lg);
}

ConstResult gamma_boundary(double alpha, double p, const QuadratureConfig& cfg) {
  check_alpha(alpha);
  if (!(p > -1.0 && p < alpha))
    throw InputError("gamma_boundary: p must lie in (-1, alpha)");
  if (p == 0.0 || p == alpha - 1.0) return {0.0, 0.0};  // integrand vanishes

  // left half over [0, 1/2]
  double left_val, left_err;
  if (p <= 0.0) {
    double sig_l = std::min(p, alpha - p - 1.0);
    auto left = [=](double t) {
      return (std::pow(t, p) - 1.0) * (1.0 - std::pow(t, alpha - p - 1.0)) *
             std::pow(1.0 - t, -1.0 - alpha);
    };
    QuadResult ql = integrate_power_tamed(left, 0.0, 0.5, sig_l, cfg);
    require_converged(ql, "gamma_boundary");
    left_val = ql.value;
    left_err = ql.err_estimate;
  } else {
    // For p > 0 the factor t^{alpha-p-1} approaches t^{-1} as p -> alpha, so
    // it is peeled off analytically: with c = alpha-p and
    // G(t) = (1-t^p)(1-t)^{-1-alpha},
    //   left = int (t^p-1)(1-t)^{-1-alpha} dt
    //          + G(0) (1/2)^c / c + int t^{c-1} (G(t)-G(0)) dt,  G(0) = 1.
    double c = alpha - p;
    auto part_a = [=](double t) {
      return (std::pow(t, p) - 1.0) * std::pow(1.0 - t, -1.0 - alpha);
    };
    auto part_b = [=](double t) {
      double G = (1.0 - std::pow(t, p)) * std::pow(1.0 - t, -1.0 - alpha);
      return std::pow(t, c - 1.0) * (G - 1.0);
    };
    QuadResult qa = integrate_power_tamed(part_a, 0.0, 0.5, 0.0, cfg);
    QuadResult qb = integrate_power_tamed(part_b, 0.0, 0.5,
                                          c + std::min(p, 1.0) - 1.0, cfg);
    require_converged(qa, "gamma_boundary");
    require_converged(qb, "gamma_boundary");
    left_val = qa.value + std::pow(0.5, c) / c + qb.value;
    left_err = qa.err_estimate + qb.err_estimate;
  }

  // right half in eps = 1-t: the two expm1 factors are folded together so
  // their eps^2 product never underflows against eps^{-1-alpha}
  auto right = [=](double eps) {
    double L = std::log1p(-eps);
    double R1 = rexpm1(p * L);
    double R2 = rexpm1((alpha - p - 1.0) * L);
    double Le = L / eps;
    return -p * (alpha - p - 1.0) * R1 * R2 * Le * Le *
           std::exp((1.0 - alpha) * std::log(eps));
  };
  QuadResult qr = integrate_power_tamed(right, 0.0, 0.5, 1.0 - alpha, cfg);
  require_converged(qr, "gamma_boundary");
  return {left_val + qr.value, left_err + qr.err_estimate};
}

ConstResult c_boundary(const StableParams& params, double p,
                       const QuadratureConfig& cfg) {
  params.validate();
  if (params.d < 2)
    throw InputError("c_boundary: requires d >= 2 (see c_boundary_line)");
  ConstResult g = gamma_boundary(params.alpha, p, cfg);
  double factor = amplitude(params) * 0.5 * sphere_surface(params.d - 1) *
                  std::beta(0.5 * (params.alpha + 1.0), 0.5 * (params.d - 1));
  return {factor * g.value, factor * g.err_estimate};
}

ConstResult c_boundary_line(double alpha, double p, const QuadratureConfig& cfg) {
  ConstResult g = gamma_boundary(alpha, p, cfg);
  double factor = amplitude(StableParams(1, alpha));
  return {factor * g.value, factor * g.err_estimate};
}

double invert_c_boundary(const StableParams& params, double C1,
                         const QuadratureConfig& cfg) {
  params.validate();
  const double alpha = params.alpha;
  if (C1 < 0.0) throw InputError("invert_c_boundary: C1 must be >= 0");
  if (C1 == 0.0) {
    if (alpha <= 1.0)
      throw InputError("invert_c_boundary: C1 = 0 requires alpha > 1");
    return alpha - 1.0;
  }
  const double left = std::max(alpha - 1.0, 0.0);
  double lo = left + 1e-12, hi = alpha - 1e-6;
  auto f = [&](double p) { return c_boundary(params, p, cfg).value; };

  for (int i = 0; f(hi) < C1; ++i) {
    if (i >= 40)
      throw NumericError("invert_c_boundary: bracket expansion failed", C1);
    hi = alpha - 0.25 * (alpha - hi);
  }
  for (int i = 0; f(lo) > C1; ++i) {
    if (i >= 40) return lo;  // C1 below resolvable left edge
    lo = left + 0.25 * (lo - left);
  }
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < C1 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ConstResult h_profile(const StableParams& params, double s,
                      const QuadratureConfig& cfg) {
  params.validate();
  if (params.d < 2) throw InputError("h_profile: requires d >= 2");
  if (!(s >= 1.0)) throw InputError("h_profile: s must be >= 1");
  if (s > 10.0) {
    ConstResult w = w_profile(params, 1.0 / s, cfg);
    double scale = std::pow(s, params.alpha);
    return {scale * w.value, scale * w.err_estimate};
  }
  return h_profile_eps(params, s - 1.0, cfg);
}

ConstResult c_origin(const StableParams& params, double p,
                     const QuadratureConfig& cfg) {
  params.validate();
  if (params.d < 2) throw InputError("c_origin: requires d >= 2");
  return origin_profile(params).eval(p, cfg);
}

double invert_c_origin(const StableParams& params, double C1,
                       const QuadratureConfig& cfg) {
  params.validate();
  if (params.d < 2) throw InputError("invert_c_origin: requires d >= 2");
  if (!(C1 > 0.0)) throw InputError("invert_c_origin: C1 must be > 0");
  const double alpha = params.alpha;
  const OriginProfile& prof = origin_profile(params);
  auto f = [&](double p) { return prof.eval(p, cfg).value; };

  double lo = 1e-8 * alpha, hi = alpha * (1.0 - 1e-12);
  for (int i = 0; f(lo) > C1; ++i) {
    if (i >= 40)
      throw NumericError("invert_c_origin: C1 below resolvable range", C1);
    lo *= 0.25;
  }
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < C1 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace critkill
