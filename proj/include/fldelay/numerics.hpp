#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace fldelay::numerics {

/// Finite bracket [lo, hi] for one-dimensional searches.
struct Interval {
  double lo;
  double hi;

  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw std::invalid_argument("Interval: requires finite lo < hi");
  }

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Secondary real branch W_{-1} of the Lambert W function.
///
/// For x in [-1/e, 0) returns the unique w <= -1 with w*exp(w) = x.
/// Residual |w*exp(w) - x| stays below 1e-12 * max(1, |x|); in practice the
/// result is correct to machine precision away from the branch point.
/// Throws std::domain_error outside [-1/e, 0).
double lambert_w_m1(double x);

/// Root of a sign-changing function by plain bisection.
/// Requires f(lo) and f(hi) of opposite (or zero) sign; the function is
/// assumed monotone on the bracket so the root is unique.
template <typename F>
double bisect_root(F&& f, Interval bracket, double tol = 1e-12) {
  double lo = bracket.lo, hi = bracket.hi;
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw std::invalid_argument("bisect_root: no sign change over bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (fhi > 0.0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

struct ThresholdResult {
  double value;        // smallest bracketed point where the predicate holds
  int iterations;      // bisection steps taken
  double final_width;  // hi - lo at termination
};

/// Threshold of a monotone boolean predicate (false below, true at and above).
///
/// Bisects until (hi - lo)/hi <= rel_tol and returns the feasible upper end,
/// so the result itself always satisfies the predicate. Requires the
/// predicate to hold at bracket.hi; if it already holds at bracket.lo the
/// bracket is degenerate and lo is returned.
template <typename Pred>
ThresholdResult bisect_threshold_full(Pred&& feasible, Interval bracket,
                                      double rel_tol = 1e-6,
                                      int max_iter = 200) {
  double lo = bracket.lo, hi = bracket.hi;
  if (!feasible(hi))
    throw std::invalid_argument(
        "bisect_threshold: predicate false at bracket upper end");
  if (feasible(lo)) return {lo, 0, hi - lo};
  int it = 0;
  while ((hi - lo) / hi > rel_tol && it < max_iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
    ++it;
  }
  return {hi, it, hi - lo};
}

template <typename Pred>
double bisect_threshold(Pred&& feasible, Interval bracket,
                        double rel_tol = 1e-6) {
  return bisect_threshold_full(std::forward<Pred>(feasible), bracket, rel_tol)
      .value;
}

struct MinResult {
  double x;
  double value;
  bool flat;  // objective indistinguishable from constant over the bracket
};

/// Golden-section minimization of a convex function over a bracket.
/// Returns a point within tol of the minimizer. Non-finite objective values
/// signal a caller bug and throw std::logic_error.
template <typename F>
MinResult minimize_convex_1d(F&& f, Interval bracket, double tol = 1e-10) {
  constexpr double invphi = 0.6180339887498949;   // 1/phi
  constexpr double invphi2 = 0.3819660112501051;  // 1/phi^2
  auto eval = [&](double x) {
    const double y = f(x);
    if (std::isnan(y) || (std::isinf(y)))
      throw std::logic_error("minimize_convex_1d: non-finite objective value");
    return y;
  };

  double a = bracket.lo, b = bracket.hi;
  double h = b - a;
  double x1 = a + invphi2 * h, x2 = a + invphi * h;
  double f1 = eval(x1), f2 = eval(x2);
  while (h > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      h = b - a;
      x1 = a + invphi2 * h;
      if (x1 <= a || x1 >= x2) break;
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      h = b - a;
      x2 = a + invphi * h;
      if (x2 <= x1 || x2 >= b) break;
      f2 = eval(x2);
    }
  }
  double xm = 0.5 * (a + b);
  double fm = eval(xm);
  if (f1 < fm) {
    xm = x1;
    fm = f1;
  }
  if (f2 < fm) {
    xm = x2;
    fm = f2;
  }

  // Flat objective: probe the original bracket and compare spreads.
  double pmin = fm, pmax = fm;
  for (int i = 0; i <= 4; ++i) {
    const double y = eval(bracket.lo + bracket.width() * i / 4.0);
    pmin = std::min(pmin, y);
    pmax = std::max(pmax, y);
  }
  if (pmax - pmin <= 1e-12 * std::max(1.0, std::abs(fm)))
    return {bracket.mid(), fm, true};
  return {xm, fm, false};
}

}  // namespace fldelay::numerics
