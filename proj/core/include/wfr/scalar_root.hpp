#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace wfr {

struct RootResult {
  double x = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Safeguarded Newton for an increasing scalar function with a sign change
/// on [lo, hi]. `fn(x)` returns {value, derivative}. Newton steps that leave
/// the current bracket (or a non-finite derivative) fall back to bisection;
/// at most `max_newton` Newton steps are taken. Converges when |value| <=
/// `ftol` or the bracket shrinks to a few ulps.
template <class Fn>
RootResult solve_increasing(Fn&& fn, double lo, double hi, double x0, double ftol, int max_newton,
                            int max_total = 400) {
  RootResult r;
  double x = std::clamp(x0, lo, hi);
  int newton = 0;
  for (r.iterations = 1; r.iterations <= max_total; ++r.iterations) {
    const auto [fx, dfx] = fn(x);
    if (std::abs(fx) <= ftol) {
      r.x = x;
      r.converged = true;
      return r;
    }
    if (fx < 0.0) lo = x;
    else hi = x;
    const double scale = std::max({std::abs(lo), std::abs(hi), std::numeric_limits<double>::min()});
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * scale) {
      r.x = x;
      r.converged = true;
      return r;
    }
    double next = 0.5 * (lo + hi);
    if (newton < max_newton && std::isfinite(dfx) && dfx > 0.0) {
      const double xn = x - fx / dfx;
      if (xn > lo && xn < hi) {
        next = xn;
        ++newton;
      }
    }
    x = next;
  }
  r.x = x;
  return r;
}

}  // namespace wfr
