#pragma once

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace ewsim {

/// Bisection on [lo, hi]; requires a sign change. Stops when the interval is
/// below xtol or |f| below ftol (pass 0 to disable either criterion).
template <class F>
double bisect(F&& f, double lo, double hi, double xtol, double ftol = 0.0,
              int max_iter = 200, const char* what = "bisect") {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    throw NumericError(std::string(what) + ": no sign change in bracket [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((ftol > 0 && std::abs(fm) <= ftol) || (hi - lo) <= xtol) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Golden-section maximization of f on [lo, hi] to position tolerance xtol.
template <class F>
double golden_max(F&& f, double lo, double hi, double xtol) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace ewsim
