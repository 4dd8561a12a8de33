#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "critkill/core_model.hpp"
#include "critkill/rng.hpp"

namespace critkill {

struct PathConfig {
  double t_end = 1.0;
  double base_step = 0.0;  // <= 0 selects t_end / 64
  double c_step = 0.2;     // adaptive rule dt = min(base_step, c_step dist^alpha)
  int max_steps = 100000;
  std::function<Vec(const Vec&)> drift;  // optional bounded field, Euler term
  bool thinning = false;  // kill when A crosses an Exp(1) level instead of weighting
  // score the path as potential-killed once A exceeds this; the weight it
  // could still carry is below exp(-a_stop), so estimators inherit at most
  // that much bias. Set to +inf for exact weighting.
  double a_stop = 23.0;
  std::vector<double> report_times;  // ascending, in (0, t_end]; hit exactly
};

enum class KillCause { Exit, Potential };

struct PathRealization {
  std::vector<double> times;
  std::vector<Vec> positions;
  std::vector<double> functional;  // A_t per recorded time, nondecreasing
  std::optional<std::pair<double, KillCause>> killed_at;
  bool truncated = false;
};

struct WalkResult {
  std::optional<std::pair<double, KillCause>> killed_at;
  bool truncated = false;
  int steps = 0;
};

// One-sided stable variate with Laplace transform exp(-h lambda^index),
// via the Kanter representation. Two uniforms per call.
double positive_stable_increment(double index, double h, CounterRng& rng);

// Exact isotropic alpha-stable increment over time h (generator -(-Delta)^{alpha/2}):
// Gaussian with covariance 2S I conditioned on the subordinator value S.
Vec isotropic_stable_increment(const StableParams& params, double h,
                               CounterRng& rng);

// Core time-stepping loop shared by path recording and streaming estimators.
// The observer sees every grid point: obs(t, x, A, alive); alive=false marks
// the kill record (exit or thinning), after which the walk stops. Exit is
// detected on the grid only; PuncturedSpace never exits (the potential does
// the killing there). A_t uses the trapezoid rule on kappa along surviving
// steps. Draws are keyed by (seed, stream, step), so a realization depends
// only on those coordinates.
template <class Obs>
WalkResult walk_path(const StableParams& params, const Vec& x0,
                     const Domain& domain, const KillingPotential& pot,
                     const PathConfig& cfg, CounterRng& rng, Obs&& obs) {
  if (!domain.contains(x0)) throw InputError("walk_path: x0 must be interior");
  const double base = cfg.base_step > 0 ? cfg.base_step : cfg.t_end / 64.0;
  const double alpha = params.alpha;
  const bool has_pot = pot.C1 != 0.0 || pot.C2 != 0.0;
  const bool origin_pot =
      has_pot && pot.geometry == KillingPotential::Geometry::OriginDistance;
  const double inf = std::numeric_limits<double>::infinity();

  double thin_level = inf;
  if (cfg.thinning) {
    rng.set_salt(1);
    thin_level = -std::log(rng.uniform01());
    rng.set_salt(0);
  }

  auto kappa_at = [&](const Vec& xx) -> double {
    if (!has_pot) return 0.0;
    double dsing = origin_pot ? norm2(xx) : dist_to_boundary(domain, xx);
    if (dsing == 0.0) return inf;  // measure-zero landing on the singular set
    return kappa_of(pot, domain, xx);
  };

  double t = 0.0, A = 0.0;
  Vec x = x0;
  double kprev = kappa_at(x);
  obs(0.0, x, 0.0, true);

  WalkResult res;
  std::size_t next_report = 0;
  for (int step = 0;; ++step) {
    if (t >= cfg.t_end) break;
    if (step >= cfg.max_steps) {
      res.truncated = true;
      break;
    }
    double dist = dist_to_boundary(domain, x);
    if (origin_pot) dist = std::min(dist, norm2(x));
    double dt = base;
    if (std::isfinite(dist))
      dt = std::min(dt, cfg.c_step * std::pow(dist, alpha));
    while (next_report < cfg.report_times.size() &&
           cfg.report_times[next_report] <= t)
      ++next_report;
    double target = cfg.t_end;
    if (next_report < cfg.report_times.size())
      target = std::min(target, cfg.report_times[next_report]);
    bool snap = t + dt >= target;
    if (snap) dt = target - t;
    if (!(dt > 0.0)) {  // stalled against the singular set
      res.truncated = true;
      break;
    }

    rng.set_step(static_cast<std::uint64_t>(step));
    Vec dx = isotropic_stable_increment(params, dt, rng);
    if (cfg.drift) {
      Vec g = cfg.drift(x);
      for (int i = 0; i < params.d; ++i) dx[i] += g[i] * dt;
    }
    for (int i = 0; i < params.d; ++i) x[i] += dx[i];
    t = snap ? target : t + dt;
    res.steps = step + 1;

    if (domain.kind != Domain::Kind::PuncturedSpace && !domain.contains(x)) {
      res.killed_at = {{t, KillCause::Exit}};
      obs(t, x, A, false);
      break;
    }
    double knew = kappa_at(x);
    A += 0.5 * dt * (kprev + knew);
    kprev = knew;
    if ((cfg.thinning && A >= thin_level) || A >= cfg.a_stop) {
      res.killed_at = {{t, KillCause::Potential}};
      obs(t, x, A, false);
      break;
    }
    obs(t, x, A, true);
  }
  return res;
}

PathRealization simulate_path(const StableParams& params, const Vec& x0,
                              const Domain& domain, const KillingPotential& pot,
                              const PathConfig& cfg, CounterRng& rng);

// Little-endian record: path_id u64, n_steps u32, then per recorded point
// t f64, x (d f64), A f64.
void append_path_record(std::ostream& out, std::uint64_t path_id,
                        const PathRealization& path, int d);

}  // namespace critkill
