#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace hawkesruin {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// A stream is identified by a 64-bit key and a 64-bit stream index; the
// remaining 64 bits of the counter enumerate blocks inside the stream. Two
// engines with the same (key, stream) produce identical sequences no matter
// which thread runs them, which is what makes path-parallel Monte Carlo
// reproducible.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t key, std::uint64_t stream) noexcept;

  result_type operator()() noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform_open() noexcept;

  static Block encrypt(Block counter, Key key) noexcept;

 private:
  void refill() noexcept;

  Key key_;
  Block counter_;
  Block buffer_{};
  unsigned position_ = 4;
};

// Key/stream pair for one Monte Carlo path.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  Philox4x32 engine() const noexcept { return Philox4x32(seed, stream); }
};

// SplitMix64 finaliser; derives independent master keys from one seed and a
// purpose tag.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

}  // namespace hawkesruin
