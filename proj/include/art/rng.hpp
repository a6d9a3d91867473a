#pragma once

#include <cstdint>

// Counter-based pseudo-random streams.  Every draw is a pure function of
// (seed, stream, index), so replays are bit-identical regardless of platform
// or evaluation order.  std::uniform_int_distribution and friends are
// implementation-defined and would break golden-file reproducibility.

namespace art {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output function.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Named sub-streams so independent draw sites never collide.
enum class Stream : std::uint64_t {
  key_draw = 1,
  rsi_init = 2,
  rsi_resample = 3,
  query_start = 4,
  query_alpha = 5,
  churn_coin = 6,
  churn_pick = 7,
  fail_pick = 8,
  load_key = 9,
  range_key = 10,
};

inline std::uint64_t stream_base(std::uint64_t seed, Stream stream) noexcept {
  return mix64(seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(stream)));
}

// The n-th value of a stream.
inline std::uint64_t stream_value(std::uint64_t seed, Stream stream,
                                  std::uint64_t index) noexcept {
  return mix64(stream_base(seed, stream) + kGolden * (index + 1));
}

// Unbiased-enough bounded draw (fixed-point multiply; bias is < 2^-40 for the
// bound sizes used here).
inline std::uint64_t bounded(std::uint64_t raw, std::uint64_t n) noexcept {
  using u128 = unsigned __int128;
  return static_cast<std::uint64_t>((static_cast<u128>(raw) * n) >> 64);
}

inline std::uint64_t stream_below(std::uint64_t seed, Stream stream,
                                  std::uint64_t index, std::uint64_t n) noexcept {
  return bounded(stream_value(seed, stream, index), n);
}

// Sequential generator for sample sites that need a variable number of draws
// (rejection loops).  Seed it from a (seed, stream, index) triple and the
// whole sample stays a pure function of that triple.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  std::uint64_t next() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform in [0, 1).
  double next_double() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]; safe as a log() argument.
  double next_open_double() noexcept {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  std::uint64_t next_below(std::uint64_t n) noexcept { return bounded(next(), n); }

 private:
  std::uint64_t state_;
};

}  // namespace art
