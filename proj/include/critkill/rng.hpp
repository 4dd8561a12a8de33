#pragma once

#include <array>
#include <cstdint>

namespace critkill {

// Philox4x64-10 block function (counter-based, splittable by construction).
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                        std::array<std::uint64_t, 2> key);

// Stateless-by-coordinates stream: key = (seed, stream), counter =
// (block, step, salt, 0). Identical coordinates give identical draws no
// matter which thread asks, which is what makes parallel runs replayable.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_{seed, stream} {}

  // The step/salt coordinates select an independent substream; switching
  // them discards any buffered words so draw counts stay aligned.
  void set_step(std::uint64_t step) {
    step_ = step;
    reset_block();
  }
  void set_salt(std::uint64_t salt) {
    salt_ = salt;
    reset_block();
  }

  std::uint64_t next_u64();

  // uniform on (0,1), both endpoints excluded
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal via Box-Muller; pairs are cached within a substream
  double normal();

 private:
  void reset_block() {
    block_ = 0;
    pos_ = 4;
    have_cached_ = false;
  }

  std::array<std::uint64_t, 2> key_;
  std::uint64_t step_ = 0, salt_ = 0, block_ = 0;
  std::array<std::uint64_t, 4> buf_{};
  int pos_ = 4;
  bool have_cached_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace critkill
