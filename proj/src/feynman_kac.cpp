#include "critkill/feynman_kac.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "critkill/errors.hpp"
#include "critkill/parallel.hpp"
#include "critkill/rng.hpp"

namespace critkill {
namespace {

struct BlockStat {
  double sum = 0.0, sumsq = 0.0;
  long alive = 0, truncated = 0, window = 0;
};

struct FinalState {
  double A = 0.0;
  bool alive = false;
  Vec x;
};

// Runs the path ensemble and reduces per-block partial sums in block order,
// so the totals do not depend on the worker count.
// score(state, window_hit) -> weight of one path.
template <class Score>
BlockStat run_ensemble(const StableParams& params, const Vec& x0,
                       const Domain& domain, const KillingPotential& pot,
                       const PathConfig& pc, const McConfig& cfg,
                       std::uint64_t seed, std::uint32_t ensemble_id,
                       Score&& score) {
  long n = cfg.n_paths;
  if (n <= 0) throw InputError("McConfig: n_paths must be > 0");
  if (n >= (1L << 32))
    throw InputError("McConfig: n_paths must fit in 32 bits");
  long nb = (n + kBlockSize - 1) / kBlockSize;
  std::vector<BlockStat> acc(nb);

  parallel_blocks(n, cfg.workers, [&](long b, long lo, long hi) {
    BlockStat st;
    FinalState fs;
    auto obs = [&fs](double, const Vec& xx, double A, bool ok) {
      fs.A = A;
      fs.alive = ok;
      fs.x = xx;
    };
    for (long i = lo; i < hi; ++i) {
      CounterRng rng(seed, (std::uint64_t(ensemble_id) << 32) |
                               std::uint64_t(i));
      WalkResult r = walk_path(params, x0, domain, pot, pc, rng, obs);
      fs.alive = !r.killed_at && !r.truncated;
      if (r.truncated) ++st.truncated;
      if (fs.alive) ++st.alive;
      bool window_hit = false;
      double w = score(fs, window_hit);
      if (window_hit) ++st.window;
      st.sum += w;
      st.sumsq += w * w;
    }
    acc[b] = st;
  });

  BlockStat total;
  for (const BlockStat& st : acc) {
    total.sum += st.sum;
    total.sumsq += st.sumsq;
    total.alive += st.alive;
    total.truncated += st.truncated;
    total.window += st.window;
  }
  return total;
}

EstimatorResult to_result(const BlockStat& st, long n) {
  EstimatorResult res;
  res.n_paths = n;
  res.value = st.sum / double(n);
  double var = 0.0;
  if (n > 1) var = std::max(0.0, (st.sumsq - n * res.value * res.value) /
                                     double(n - 1));
  res.half_width_95 = 1.96 * std::sqrt(var / double(n));
  res.diagnostics["ess"] =
      st.sumsq > 0.0 ? st.sum * st.sum / st.sumsq : 0.0;
  res.diagnostics["alive_rate"] = double(st.alive) / double(n);
  res.diagnostics["truncated_rate"] = double(st.truncated) / double(n);
  return res;
}

// distance to the set the survival asymptotics are measured against
double decay_dist(const Domain& domain, const KillingPotential& pot,
                  const Vec& x) {
  if (domain.kind == Domain::Kind::PuncturedSpace ||
      pot.geometry == KillingPotential::Geometry::OriginDistance)
    return norm2(x);
  return dist_to_boundary(domain, x);
}

}  // namespace

EstimatorResult estimate_survival(const StableParams& params, const Vec& x,
                                  double t, const Domain& domain,
                                  const KillingPotential& pot,
                                  const McConfig& cfg, std::uint64_t seed,
                                  std::uint32_t ensemble_id) {
  params.validate();
  if (int(x.size()) != params.d)
    throw InputError("estimate_survival: point dimension mismatch");
  if (!(t > 0.0)) throw InputError("estimate_survival: t must be > 0");
  if (!domain.contains(x))
    throw InputError("estimate_survival: x must be interior");

  PathConfig pc = cfg.path;
  pc.t_end = t;
  pc.report_times.clear();
  auto score = [&pc](const FinalState& fs, bool&) {
    return fs.alive ? std::exp(-std::min(fs.A, pc.a_stop)) : 0.0;
  };
  BlockStat st = run_ensemble(params, x, domain, pot, pc, cfg, seed,
                              ensemble_id, score);
  EstimatorResult res = to_result(st, cfg.n_paths);
  if (res.diagnostics["ess"] <= 0.0)
    throw EstimatorError("estimate_survival: zero effective sample size");
  return res;
}

ExponentFit fit_exponent(const StableParams& params, const Domain& domain,
                         const KillingPotential& pot, double t,
                         const std::vector<Vec>& ray, const McConfig& cfg,
                         std::uint64_t seed) {
  params.validate();
  if (ray.size() < 2)
    throw InputError("fit_exponent: need at least two ray points");
  double scale = std::pow(t, 1.0 / params.alpha);

  ExponentFit fit;
  fit.points.reserve(ray.size());
  double prev = 0.0;
  for (size_t i = 0; i < ray.size(); ++i) {
    double dist = decay_dist(domain, pot, ray[i]);
    if (!(dist > 0.0))
      throw InputError("fit_exponent: ray points must be interior");
    if (dist > 0.5 * scale)
      throw InputError(
          "fit_exponent: ray points must lie inside the decay window");
    if (i > 0 && !(dist < prev))
      throw InputError("fit_exponent: ray distances must decrease");
    prev = dist;
    PointDecay pd;
    pd.x = ray[i];
    pd.dist = dist;
    pd.survival = estimate_survival(params, ray[i], t, domain, pot, cfg, seed,
                                    std::uint32_t(i));
    if (pd.survival.value - pd.survival.half_width_95 <= 0.0)
      throw EstimatorError(
          "fit_exponent: a per-point confidence interval spans zero");
    fit.points.push_back(std::move(pd));
  }

  // weighted least squares of log(survival) on log(dist), weights from the
  // delta-method standard error of the log
  double sw = 0.0, swx = 0.0, swy = 0.0;
  std::vector<double> lx(ray.size()), ly(ray.size()), wt(ray.size());
  for (size_t i = 0; i < fit.points.size(); ++i) {
    const PointDecay& pd = fit.points[i];
    double se = pd.survival.half_width_95 / (1.96 * pd.survival.value);
    se = std::max(se, 1e-12);
    lx[i] = std::log(pd.dist);
    ly[i] = std::log(pd.survival.value);
    wt[i] = 1.0 / (se * se);
    sw += wt[i];
    swx += wt[i] * lx[i];
    swy += wt[i] * ly[i];
  }
  double xbar = swx / sw, ybar = swy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < fit.points.size(); ++i) {
    sxx += wt[i] * (lx[i] - xbar) * (lx[i] - xbar);
    sxy += wt[i] * (lx[i] - xbar) * (ly[i] - ybar);
  }
  if (!(sxx > 0.0)) throw EstimatorError("fit_exponent: degenerate abscissae");
  fit.p_hat = sxy / sxx;
  fit.std_err = std::sqrt(1.0 / sxx);
  return fit;
}

std::vector<Vec> make_decay_ray(const StableParams& params,
                                const Domain& domain,
                                const KillingPotential& pot, double t, int n) {
  params.validate();
  if (n < 2) throw InputError("make_decay_ray: need n >= 2");
  if (!(t > 0.0)) throw InputError("make_decay_ray: t must be > 0");
  double scale = std::pow(t, 1.0 / params.alpha);
  double hi = scale / 4.0, lo = scale / 64.0;

  bool origin = domain.kind == Domain::Kind::PuncturedSpace ||
                pot.geometry == KillingPotential::Geometry::OriginDistance;
  if (domain.kind == Domain::Kind::Ball && !(hi < domain.radius))
    throw InputError("make_decay_ray: decay window exceeds the domain");
  if (domain.kind == Domain::Kind::WholeSpace && !origin)
    throw InputError("make_decay_ray: whole space has no decay set");

  std::vector<Vec> ray;
  ray.reserve(n);
  for (int k = 0; k < n; ++k) {
    double dist = hi * std::pow(lo / hi, double(k) / double(n - 1));
    Vec x(params.d, 0.0);
    switch (domain.kind) {
      case Domain::Kind::PuncturedSpace:
      case Domain::Kind::WholeSpace:
        x[0] = dist;
        break;
      case Domain::Kind::HalfSpace:
        x.back() = dist;
        break;
      case Domain::Kind::Ball: {
        for (int i = 0; i < params.d; ++i)
          x[i] = domain.center.empty() ? 0.0 : domain.center[i];
        x[0] += domain.radius - dist;
        break;
      }
    }
    ray.push_back(std::move(x));
  }
  return ray;
}

EstimatorResult estimate_kernel(const StableParams& params, const Vec& x,
                                const Vec& y, double t, const Domain& domain,
                                const KillingPotential& pot,
                                const McConfig& cfg, std::uint64_t seed,
                                std::uint32_t ensemble_id) {
  params.validate();
  if (int(x.size()) != params.d || int(y.size()) != params.d)
    throw InputError("estimate_kernel: point dimension mismatch");
  if (!(t > 0.0)) throw InputError("estimate_kernel: t must be > 0");
  if (!domain.contains(x) || !domain.contains(y))
    throw InputError("estimate_kernel: x and y must be interior");

  double bw = cfg.bandwidth;
  if (bw <= 0.0)
    bw = 0.8 * std::pow(t, 1.0 / params.alpha) *
         std::pow(double(cfg.n_paths), -1.0 / (params.d + 4.0));

  PathConfig pc = cfg.path;
  pc.t_end = t;
  pc.report_times.clear();
  int d = params.d;
  auto score = [&pc, &y, bw, d](const FinalState& fs, bool& window_hit) {
    if (!fs.alive) return 0.0;
    double k = 1.0;
    for (int j = 0; j < d; ++j) {
      double u = (fs.x[j] - y[j]) / bw;
      if (!(std::abs(u) < 1.0)) return 0.0;
      k *= 0.75 * (1.0 - u * u) / bw;
    }
    window_hit = true;
    return std::exp(-std::min(fs.A, pc.a_stop)) * k;
  };
  BlockStat st = run_ensemble(params, x, domain, pot, pc, cfg, seed,
                              ensemble_id, score);
  EstimatorResult res = to_result(st, cfg.n_paths);
  res.diagnostics["bandwidth"] = bw;
  res.diagnostics["in_window"] = double(st.window);
  if (st.window < 100)
    throw EstimatorError(
        "estimate_kernel: fewer than 100 alive paths in the bandwidth window");
  return res;
}

FactorizationReport factorization_report(
    const StableParams& params, const Domain& domain,
    const KillingPotential& pot, double t,
    const std::vector<std::pair<Vec, Vec>>& grid, const McConfig& cfg,
    std::uint64_t seed) {
  params.validate();
  if (grid.empty()) throw InputError("factorization_report: empty grid");

  // one survival ensemble per distinct point, in first-appearance order
  std::vector<Vec> pts;
  std::vector<EstimatorResult> surv;
  auto survival_of = [&](const Vec& x) -> const EstimatorResult& {
    for (size_t i = 0; i < pts.size(); ++i)
      if (pts[i] == x) return surv[i];
    std::uint32_t id = std::uint32_t(pts.size());
    pts.push_back(x);
    surv.push_back(estimate_survival(params, x, t, domain, pot, cfg, seed, id));
    return surv.back();
  };

  ScalingFunction phi = ScalingFunction::power_law(params.alpha);
  VolumeModel vol = VolumeModel::lebesgue(params.d);

  FactorizationReport rep;
  rep.cells.reserve(grid.size());
  for (size_t k = 0; k < grid.size(); ++k) {
    FactorizationCell cell;
    cell.x = grid[k].first;
    cell.y = grid[k].second;
    EstimatorResult kr =
        estimate_kernel(params, cell.x, cell.y, t, domain, pot, cfg, seed,
                        std::uint32_t(4096 + k));
    EstimatorResult sx = survival_of(cell.x);
    EstimatorResult sy = survival_of(cell.y);
    cell.kernel = kr.value;
    cell.kernel_hw = kr.half_width_95;
    cell.survival_x = sx.value;
    cell.survival_x_hw = sx.half_width_95;
    cell.survival_y = sy.value;
    cell.survival_y_hw = sy.half_width_95;
    cell.comparison = tilde_q(params, phi, vol, t, cell.x, cell.y);
    cell.ratio =
        cell.kernel / (cell.survival_x * cell.survival_y * cell.comparison);
    double rel = 0.0;
    rel += (kr.half_width_95 / kr.value) * (kr.half_width_95 / kr.value);
    rel += (sx.half_width_95 / sx.value) * (sx.half_width_95 / sx.value);
    rel += (sy.half_width_95 / sy.value) * (sy.half_width_95 / sy.value);
    cell.ratio_hw = std::abs(cell.ratio) * std::sqrt(rel);
    rep.cells.push_back(std::move(cell));
  }

  rep.min_ratio = rep.cells.front().ratio;
  rep.max_ratio = rep.cells.front().ratio;
  for (const FactorizationCell& c : rep.cells) {
    rep.min_ratio = std::min(rep.min_ratio, c.ratio);
    rep.max_ratio = std::max(rep.max_ratio, c.ratio);
  }
  rep.spread = rep.max_ratio / rep.min_ratio;
  return rep;
}

}  // namespace critkill
