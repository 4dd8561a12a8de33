#include "critkill/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace critkill {

namespace {

struct Panel {
  double a, b;
  double value;
  double err;
  double l1;          // Kronrod estimate of int |f| over the panel
  bool frozen = false;  // at floating-point resolution; err is an L1 bound
};

Panel eval_panel(const Integrand& f, double a, double b) {
  double err = 0.0, l1 = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 0, 0.0, &err, &l1);
  // boost reports the rule difference in the normalized [-1,1] variable;
  // the value and L1 come back scaled to [a,b], the error does not
  err *= 0.5 * (b - a);
  if (!std::isfinite(v))
    throw NumericError("quadrature: non-finite panel on [" +
                       std::to_string(a) + ", " + std::to_string(b) + "]");
  return Panel{a, b, v, err, l1};
}

double kahan_sum(const std::vector<Panel>& panels, double Panel::*field) {
  double s = 0.0, c = 0.0;
  for (const Panel& p : panels) {
    double y = p.*field - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

QuadResult refine(const Integrand& f, std::vector<Panel> panels,
                  const QuadratureConfig& cfg) {
  QuadResult res;
  while (true) {
    res.value = kahan_sum(panels, &Panel::value);
    res.err_estimate = kahan_sum(panels, &Panel::err);
    res.subdivisions = static_cast<int>(panels.size());
    double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(res.value));
    if (res.err_estimate <= tol) {
      res.converged = true;
      return res;
    }
    if (res.subdivisions >= cfg.max_subdivisions) {
      res.converged = false;
      return res;
    }
    // worst splittable panel first; ties resolved by scan order for
    // reproducibility
    std::size_t worst = panels.size();
    for (std::size_t i = 0; i < panels.size(); ++i)
      if (!panels[i].frozen &&
          (worst == panels.size() || panels[i].err > panels[worst].err))
        worst = i;
    if (worst == panels.size()) {
      // every panel is at floating-point resolution
      res.converged = false;
      return res;
    }
    Panel p = panels[worst];
    double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {
      // the rule-difference estimate has a noise floor that never contracts
      // on panels this thin; the L1 mass bounds the true error rigorously
      panels[worst].err = std::min(p.err, p.l1 + std::fabs(p.value));
      panels[worst].frozen = true;
      continue;
    }
    panels[worst] = eval_panel(f, p.a, mid);
    panels.push_back(eval_panel(f, mid, p.b));
  }
}

}  // namespace

QuadResult integrate(const Integrand& f, double a, double b,
                     const QuadratureConfig& cfg) {
  if (!(a < b)) {
    if (a == b) return QuadResult{0.0, 0.0, 0, true};
    throw InputError("integrate: need a <= b");
  }
  std::vector<Panel> panels;
  panels.push_back(eval_panel(f, a, b));
  return refine(f, std::move(panels), cfg);
}

QuadResult integrate_points(const Integrand& f, double a, double b,
                            std::vector<double> breakpoints,
                            const QuadratureConfig& cfg) {
  if (!(a < b)) {
    if (a == b) return QuadResult{0.0, 0.0, 0, true};
    throw InputError("integrate_points: need a <= b");
  }
  std::vector<double> cuts{a};
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double c : breakpoints)
    if (c > cuts.back() && c < b) cuts.push_back(c);
  cuts.push_back(b);

  std::vector<Panel> panels;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    panels.push_back(eval_panel(f, cuts[i], cuts[i + 1]));
  return refine(f, std::move(panels), cfg);
}

int taming_order(double sigma) {
  if (!(sigma > -1.0))
    throw InputError("taming_order: sigma must be > -1");
  if (sigma >= 2.0) return 1;
  if (sigma < -1.0 + 1e-6)
    throw NumericError("taming_order: exponent too close to -1 to tame");
  return static_cast<int>(std::ceil(3.0 / (1.0 + sigma)));
}

QuadResult integrate_power_tamed(const Integrand& f, double a, double b,
                                 double sigma, const QuadratureConfig& cfg) {
  if (!(a < b)) {
    if (a == b) return QuadResult{0.0, 0.0, 0, true};
    throw InputError("integrate_power_tamed: need a <= b");
  }
  int m = taming_order(sigma);
  if (m == 1) return integrate(f, a, b, cfg);
  double len = b - a;
  auto g = [&f, a, len, m](double v) {
    double t = a + len * (std::pow(v, m - 1) * v);
    // for a != 0 the shift can absorb len v^m below eps(a); the integrand
    // limit there is 0, at the cost of ~eps(a)^{1+sigma} of mass when
    // sigma < 0 (our singular endpoints sit at 0, where nothing absorbs)
    if (t <= a) return 0.0;
    return f(t) * m * len * std::pow(v, m - 1);
  };
  return integrate(g, 0.0, 1.0, cfg);
}

QuadResult integrate_tail(const Integrand& f, double w0, double decay,
                          const QuadratureConfig& cfg) {
  if (!(w0 > 0.0)) throw InputError("integrate_tail: w0 must be > 0");
  if (!(decay > 1.0)) throw InputError("integrate_tail: decay must be > 1");
  double ex = 1.0 / (decay - 1.0);
  auto g = [&f, w0, ex](double tau) {
    if (tau <= 0.0) return 0.0;
    double w = w0 * std::pow(tau, -ex);
    return f(w) * w0 * ex * std::pow(tau, -ex - 1.0);
  };
  return integrate(g, 0.0, 1.0, cfg);
}

}  // namespace critkill
