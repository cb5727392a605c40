#pragma once

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "cclock/errors.hpp"

namespace cclock {

struct BisectionOptions {
  double x_tol = 1e-12;  // stop once the bracket is this narrow ...
  double f_tol = 1e-12;  // ... and the residual is this small
  int max_iter = 400;
};

struct BisectionResult {
  double root;
  double residual;  // f(root)
  int iterations;
};

/// Bisection on the closed bracket [lo, hi]. f(lo) and f(hi) must differ in
/// sign or vanish. Iterates until both tolerances hold or the bracket can no
/// longer be split in floating point; the endpoint with the smaller |f| wins.
template <class F>
BisectionResult bisect(F&& f, double lo, double hi, const BisectionOptions& opt = {}) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return {lo, 0.0, 0};
  if (f_hi == 0.0) return {hi, 0.0, 0};
  if (std::signbit(f_lo) == std::signbit(f_hi) || std::isnan(f_lo) || std::isnan(f_hi)) {
    throw BracketError(fmt::format("no sign change on [{:.17g}, {:.17g}]: f = {:.6g}, {:.6g}", lo,
                                   hi, f_lo, f_hi));
  }
  int iter = 0;
  while (iter < opt.max_iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    ++iter;
    if (f_mid == 0.0) return {mid, 0.0, iter};
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
    if (hi - lo <= opt.x_tol && std::min(std::abs(f_lo), std::abs(f_hi)) <= opt.f_tol) break;
  }
  return std::abs(f_lo) <= std::abs(f_hi) ? BisectionResult{lo, f_lo, iter}
                                           : BisectionResult{hi, f_hi, iter};
}

}  // namespace cclock
