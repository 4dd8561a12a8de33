#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "critkill/core_model.hpp"
#include "critkill/sampler.hpp"

namespace critkill {

struct McConfig {
  long n_paths = 200000;  // per estimator call (per point)
  int workers = 1;
  double bandwidth = 0.0;  // kernel estimates; <= 0 selects the default rule
  PathConfig path;         // t_end and report_times are overwritten per call
};

struct EstimatorResult {
  double value = 0.0;
  double half_width_95 = 0.0;  // 1.96 sample_std / sqrt(n_paths)
  long n_paths = 0;
  // effective sample size, truncation-flag rate, bandwidth used, ...
  std::map<std::string, double> diagnostics;
};

// Mean path weight 1{no exit by t} e^{-A_t}; paths keyed by
// (seed, ensemble_id << 32 | path_index), so estimates are reproducible and
// worker-count independent.
EstimatorResult estimate_survival(const StableParams& params, const Vec& x,
                                  double t, const Domain& domain,
                                  const KillingPotential& pot,
                                  const McConfig& cfg = {},
                                  std::uint64_t seed = 0,
                                  std::uint32_t ensemble_id = 0);

struct PointDecay {
  Vec x;
  double dist = 0.0;  // distance to the singular set (boundary or origin)
  EstimatorResult survival;
};

struct ExponentFit {
  double p_hat = 0.0;
  double std_err = 0.0;
  std::vector<PointDecay> points;
};

// Weighted least-squares slope of log(survival) against log(dist) along a
// ray of interior points with decreasing dist, all within t^{1/alpha}/2.
ExponentFit fit_exponent(const StableParams& params, const Domain& domain,
                         const KillingPotential& pot, double t,
                         const std::vector<Vec>& ray, const McConfig& cfg = {},
                         std::uint64_t seed = 0);

// Geometric ray of n interior points with dist running down from
// t^{1/alpha}/4 to t^{1/alpha}/64, along the first coordinate axis.
std::vector<Vec> make_decay_ray(const StableParams& params,
                                const Domain& domain,
                                const KillingPotential& pot, double t,
                                int n = 8);

// Kernel-density estimate of the killed transition density at (t, x, y):
// mean of 1{alive} e^{-A_t} K_bw(X_t - y) with a product Epanechnikov kernel.
EstimatorResult estimate_kernel(const StableParams& params, const Vec& x,
                                const Vec& y, double t, const Domain& domain,
                                const KillingPotential& pot,
                                const McConfig& cfg = {},
                                std::uint64_t seed = 0,
                                std::uint32_t ensemble_id = 0);

struct FactorizationCell {
  Vec x, y;
  double kernel = 0.0, kernel_hw = 0.0;
  double survival_x = 0.0, survival_x_hw = 0.0;
  double survival_y = 0.0, survival_y_hw = 0.0;
  double comparison = 0.0;   // tilde_q(t, x, y)
  double ratio = 0.0;        // kernel / (survival_x survival_y comparison)
  double ratio_hw = 0.0;     // 95% half width, relative errors in quadrature
};

struct FactorizationReport {
  std::vector<FactorizationCell> cells;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double spread = 0.0;  // max_ratio / min_ratio
};

// Ratio kernel/(survival_x survival_y tilde_q) per pair. Survival factors are
// estimated once per distinct point and shared across pairs.
FactorizationReport factorization_report(
    const StableParams& params, const Domain& domain,
    const KillingPotential& pot, double t,
    const std::vector<std::pair<Vec, Vec>>& grid, const McConfig& cfg = {},
    std::uint64_t seed = 0);

}  // namespace critkill
