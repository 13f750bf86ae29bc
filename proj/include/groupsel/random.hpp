#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is addressed by a StreamKey derived
// from a tuple of integers (master seed, trial, step, member, ...). Output
// depends only on the key and the position in the stream, never on the
// order in which streams are consumed, so results do not change with thread
// count or evaluation order.
//
// The bit generator is the SplitMix64 sequence: value i of the stream with
// key K is mix(K + i * golden). Bounded integers use Lemire's nearly
// divisionless rejection method; normals use Box-Muller. None of these go
// through <random> distributions, whose outputs are implementation-defined.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace groupsel {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct StreamKey {
  std::uint64_t value = 0;

  static constexpr StreamKey of(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = mix64(0x6A09E667F3BCC909ULL);
    for (std::uint64_t part : parts) h = mix64(h ^ mix64(part + kGoldenGamma));
    return StreamKey{h};
  }

  constexpr StreamKey child(std::uint64_t part) const {
    return StreamKey{mix64(value ^ mix64(part + kGoldenGamma))};
  }

  friend constexpr bool operator==(StreamKey, StreamKey) = default;
};

class CounterRng {
 public:
  explicit constexpr CounterRng(StreamKey key) : key_(key.value) {}

  constexpr std::uint64_t next() {
    ++counter_;
    return mix64(key_ + counter_ * kGoldenGamma);
  }

  // Uniform integer in [0, bound). bound must be nonzero.
  std::uint64_t bounded(std::uint64_t bound) {
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform double in (0, 1] with 53 random bits.
  double uniformOpenClosed() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Box-Muller pair from two consecutive uniforms.
struct NormalPair {
  double first;
  double second;
};

inline NormalPair standardNormalPair(CounterRng& rng) {
  const double u1 = rng.uniformOpenClosed();
  const double u2 = rng.uniformOpenClosed();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace groupsel
