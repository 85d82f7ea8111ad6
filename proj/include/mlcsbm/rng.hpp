#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace mlcsbm {

/// Philox4x32-10 block function (Salmon et al., Random123).
///
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits. The
/// generator below walks the counter, so any substream can be replayed from
/// its key alone.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// 64-bit avalanche mixer (splitmix64 finalizer).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Derives a child seed from a parent seed and a label; used for replica
/// seeds and every other labeled substream.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return mix64(mix64(seed) ^ fnv1a(label));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                                    std::uint64_t index) {
  return mix64(derive_seed(seed, label) + mix64(index + 1));
}

/// Counter-based random stream. Satisfies UniformRandomBitGenerator.
///
/// All distributions are implemented here rather than through <random> so
/// that output is bit-identical across standard library implementations.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key) : key_{static_cast<std::uint32_t>(key),
                                            static_cast<std::uint32_t>(key >> 32)} {}

  /// Substream for (seed, label).
  Stream(std::uint64_t seed, std::string_view label) : Stream(derive_seed(seed, label)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) refill();
    const auto lo = static_cast<std::uint64_t>(block_[pos_]);
    const auto hi = static_cast<std::uint64_t>(block_[pos_ + 1]);
    pos_ += 2;
    return lo | (hi << 32);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound) by Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via the Box-Muller transform; caches the second draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Fair ±1.
  int sign() { return ((*this)() >> 63) != 0 ? 1 : -1; }

  /// Number of failures before the first success of a Bernoulli(q) sequence.
  /// Returns max() when q == 0.
  std::uint64_t geometric(double q);

 private:
  void refill() {
    block_ = philox4x32(ctr_, key_);
    for (auto& c : ctr_) {
      if (++c != 0) break;
    }
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_{0, 0, 0, 0};
  std::array<std::uint32_t, 4> block_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mlcsbm
