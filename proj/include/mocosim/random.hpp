#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mocosim {

/// SplitMix64 generator. Used instead of <random> distributions, whose outputs are
/// implementation-defined, so that seeded results match across standard libraries.
class SplitMix64
{
public:
  explicit SplitMix64(std::uint64_t seed) noexcept
    : state_(seed)
  {
  }

  std::uint64_t next() noexcept
  {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double canonical() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * canonical(); }

  /// Uniform integer in [0, n). Rejection sampling removes modulo bias.
  std::uint64_t below(std::uint64_t n) noexcept
  {
    std::uint64_t const limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

  /// Standard normal deviate (Box-Muller).
  double normal() noexcept
  {
    double u1;
    do {
      u1 = canonical();
    } while (u1 <= 0.0);
    double const u2 = canonical();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept
{
  SplitMix64 g(seed ^ (tag * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
  return g.next();
}

} // namespace mocosim

