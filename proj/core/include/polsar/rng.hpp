#pragma once

#include <complex>
#include <cstdint>
#include <span>

namespace polsar {

/// SplitMix64 finalizer.
[[nodiscard]] std::uint64_t mix64(std::uint64_t z) noexcept;

/// Counter-based generator built on the SplitMix64 mixing function.
///
/// A stream is identified by (seed, stream). Draw number i of that stream is
///
///     mix64(key + (i + 1) * 0x9E3779B97F4A7C15),   key = mix64(seed ^ mix64(stream))
///
/// so any draw can be recomputed from its coordinates alone, and per-pixel or
/// per-class streams are independent of iteration and thread order.
///
/// Derived variates use fixed transforms only (no rejection loops for
/// floating-point variates), which keeps sequences identical across
/// platforms with IEEE-754 doubles and a correctly rounded libm:
///   - uniform(): top 53 bits scaled by 2^-53, range [0, 1).
///   - normal(): Box-Muller cosine branch.
///   - circular_normal(): one Box-Muller pair, E|z|^2 = 1.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Unbiased integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  double normal() noexcept;
  std::complex<double> circular_normal() noexcept;

  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace polsar
