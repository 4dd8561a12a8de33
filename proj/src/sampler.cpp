#include "critkill/sampler.hpp"

#include <cstring>

namespace critkill {

double positive_stable_increment(double index, double h, CounterRng& rng) {
  if (!(index > 0.0 && index < 1.0))
    throw InputError("positive_stable_increment: index must lie in (0,1)");
  if (!(h > 0.0)) throw InputError("positive_stable_increment: h must be > 0");
  double u = M_PI * rng.uniform01();
  double w = -std::log(rng.uniform01());
  return std::pow(h, 1.0 / index) * std::sin(index * u) *
         std::pow(std::sin(u), -1.0 / index) *
         std::pow(std::sin((1.0 - index) * u) / w, (1.0 - index) / index);
}

Vec isotropic_stable_increment(const StableParams& params, double h,
                               CounterRng& rng) {
  double s = positive_stable_increment(0.5 * params.alpha, h, rng);
  double scale = std::sqrt(2.0 * s);
  Vec dx(params.d);
  for (int i = 0; i < params.d; ++i) dx[i] = scale * rng.normal();
  return dx;
}

PathRealization simulate_path(const StableParams& params, const Vec& x0,
                              const Domain& domain, const KillingPotential& pot,
                              const PathConfig& cfg, CounterRng& rng) {
  PathRealization path;
  WalkResult res = walk_path(
      params, x0, domain, pot, cfg, rng,
      [&](double t, const Vec& x, double A, bool) {
        path.times.push_back(t);
        path.positions.push_back(x);
        path.functional.push_back(A);
      });
  path.killed_at = res.killed_at;
  path.truncated = res.truncated;
  return path;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

}  // namespace

void append_path_record(std::ostream& out, std::uint64_t path_id,
                        const PathRealization& path, int d) {
  put_u64(out, path_id);
  put_u32(out, static_cast<std::uint32_t>(path.times.size()));
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    put_f64(out, path.times[i]);
    for (int j = 0; j < d; ++j) put_f64(out, path.positions[i][j]);
    put_f64(out, path.functional[i]);
  }
}

}  // namespace critkill
