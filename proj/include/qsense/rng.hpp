#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qsense {

// splitmix64 finalizer; used to decorrelate seeds derived from a root seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seed-splitting rule for parallel streams: stream k of a root seed is
// splitmix64(root + (k + 1) * golden).  Derivations can be chained, e.g.
// sweep point i -> realization r uses derive_seed(derive_seed(root, i), r).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return splitmix64(root + (index + 1) * 0x9e3779b97f4a7c15ull);
}

// mt19937_64 with explicitly coded output maps.  The uniform and gaussian
// transforms avoid std::*_distribution so that a given seed yields the same
// draw sequence on every standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  // uniform in [0, 1), 53 random mantissa bits
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller, second value cached
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * pi_ * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static constexpr double pi_ = 3.14159265358979323846;
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace qsense
