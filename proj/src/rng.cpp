#include "critkill/rng.hpp"

#include <cmath>

namespace critkill {

namespace {

constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ull;
constexpr std::uint64_t kMult1 = 0xCA5A826395121157ull;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(prod >> 64);
  lo = static_cast<std::uint64_t>(prod);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                        std::array<std::uint64_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMult0, ctr[0], hi0, lo0);
    mulhilo(kMult1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t CounterRng::next_u64() {
  if (pos_ >= 4) {
    buf_ = philox4x64({block_, step_, salt_, 0}, key_);
    ++block_;
    pos_ = 0;
  }
  return buf_[pos_++];
}

double CounterRng::normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_normal_;
  }
  double u1 = uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  cached_normal_ = r * std::sin(2.0 * M_PI * u2);
  have_cached_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

}  // namespace critkill
