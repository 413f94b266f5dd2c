#include "fldelay/numerics.hpp"

#include <cmath>

namespace fldelay::numerics {

namespace {

// Branch-point expansion W(x) = sum mu_i * p^i with p = -sqrt(2(1 + e*x))
// (negative root selects the W_{-1} branch).
double branch_series(double p) {
  const double p2 = p * p;
  return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0))) +
         p2 * p2 *
             (-43.0 / 540.0 +
              p * (769.0 / 17280.0 + p * (-221.0 / 8505.0)));
}

}  // namespace

double lambert_w_m1(double x) {
  const double branch_point = -std::exp(-1.0);
  if (!(x >= branch_point) || !(x < 0.0))
    throw std::domain_error("lambert_w_m1: argument must lie in [-1/e, 0)");

  // Radicand of the branch-point expansion, zero (up to rounding) at x=-1/e.
  // 1 + e*x cancels catastrophically near the branch point; an fma plus a
  // double-double split of e keeps the radicand accurate to its own ulp.
  constexpr double kEHi = 2.718281828459045;
  constexpr double kELo = 1.4456468917292502e-16;
  const double q = 2.0 * (std::fma(kEHi, x, 1.0) + kELo * x);
  if (q <= 0.0) return -1.0;
  const double p = -std::sqrt(q);
  if (q < 1e-8) return branch_series(p);

  double w;
  if (q < 0.5) {
    w = branch_series(p);
  } else {
    // Asymptotic form for x -> 0^-.
    const double l1 = std::log(-x);
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1);
  }

  // Halley refinement of w*exp(w) - x = 0.
  for (int i = 0; i < 12; ++i) {
    const double ew = std::exp(w);
    const double r = w * ew - x;
    const double denom = ew * (w + 1.0) - (w + 2.0) * r / (2.0 * w + 2.0);
    const double step = r / denom;
    w -= step;
    if (w > -1.0) w = -1.0;  // stay on the secondary branch
    if (std::abs(step) <= 1e-16 * std::abs(w)) break;
  }
  return w;
}

}  // namespace fldelay::numerics
