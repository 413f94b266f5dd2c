#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fldelay {

/// Seeded generator with hand-rolled uniform/normal transforms so draws are
/// bit-for-bit reproducible across platforms (std:: distributions are
/// implementation-defined; the mt19937_64 engine itself is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes two engine draws.
  double normal() {
    const double u1 =
        (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;  // (0,1)
    const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  std::uint64_t next_u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace fldelay
