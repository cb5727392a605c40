#include "cclock/threshold.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cclock/bisection.hpp"
#include "cclock/errors.hpp"
#include "cclock/renewal.hpp"

namespace cclock {

namespace {

constexpr std::int64_t kMaxSeriesTerms = 50'000'000;

// sum_{r>=1} weight(r+1) prod_{i=1}^{r} c_i with c_i = (1-p)/z + p P(xi > i),
// which is non-increasing in i; the tail is bounded geometrically once c < 1.
template <class Weight>
double envelope_series(double p, const DelaySpec& delay, double z, double eps, Weight weight) {
  const double base = (1.0 - p) / z;
  double prod = 1.0;
  double sum = 0.0;
  for (std::int64_t r = 1; r < kMaxSeriesTerms; ++r) {
    prod *= base + p * delay.ccdf(r);
    sum += weight(r + 1) * prod;
    const double c_next = base + p * delay.ccdf(r + 1);
    if (c_next < 1.0 && prod * c_next / (1.0 - c_next) < eps * std::max(1.0, sum)) return sum;
    if (prod == 0.0) return sum;
  }
  throw InternalError(fmt::format("series failed to converge at p={}, z={}", p, z));
}

ThresholdSolution solve_z_star(double p, const DelaySpec& delay, double tol) {
  const Bracket b = z_star_bracket(p, delay);
  const double target = p / (1.0 - p);
  auto f = [&](double z) { return tilt_series(p, delay, z) - target; };
  if (b.hi - b.lo <= tol) {
    return {b.lo, {0, f(b.lo)}};
  }
  const auto res = bisect(f, b.lo, b.hi, {tol, tol, 400});
  return {res.root, {res.iterations, res.residual}};
}

}  // namespace

ThresholdSolution p_critical(const DelaySpec& delay, double tol) {
  if (!(tol > 0.0)) throw DomainError("tol must be positive");
  auto f = [&](double p) { return (1.0 - p) * RenewalLaw(p, delay).mean().value - 1.0; };
  try {
    const auto res = bisect(f, RenewalLaw::kMinP, RenewalLaw::kMaxP, {tol, tol, 400});
    return {res.root, {res.iterations, res.residual}};
  } catch (const BracketError&) {
    throw DomainError(
        fmt::format("no threshold in supported range for delay {}", delay.label()));
  }
}

double tilt_series(double p, const DelaySpec& delay, double z, double eps) {
  if (!(z > 1.0 - p)) {
    throw DomainError(fmt::format("tilt series diverges for z = {} <= 1 - p", z));
  }
  return envelope_series(p, delay, z, eps, [](std::int64_t) { return 1.0; });
}

Bracket z_star_bracket(double p, const DelaySpec& delay) {
  const double lo = (1.0 - p) / p;
  const double p1 = delay.pmf(1);
  const double hi = p1 > 0.0 ? std::min(1.0, (1.0 - p) / (p * p1)) : 1.0;
  return {lo, std::max(lo, hi)};
}

ThresholdSolution z_star(double p, const DelaySpec& delay, double tol) {
  if (!(tol > 0.0)) throw DomainError("tol must be positive");
  const double pc = p_critical(delay, tol).value;
  if (!(p > pc)) {
    throw PreconditionError(fmt::format("p = {} is not above the security threshold p_c = {:.9f}",
                                        p, pc),
                            pc);
  }
  if (p > RenewalLaw::kMaxP) {
    throw DomainError(fmt::format("p = {} outside the supported range", p));
  }
  return solve_z_star(p, delay, tol);
}

double j_transform(double p, const DelaySpec& delay, double z) {
  if (!(z > 1.0 - p)) {
    throw DomainError(fmt::format("E z^-J diverges for z = {} <= 1 - p = {}", z, 1.0 - p));
  }
  // r = 1 term has an empty product.
  double direct = p * delay.cdf(1);
  direct += envelope_series(
      p, delay, z, 1e-16, [&](std::int64_t r) { return p * delay.cdf(r); });
  const double tilted = j_transform_tilted(p, delay, z);
  if (std::abs(direct - tilted) > 1e-9 * std::max(1.0, std::abs(direct))) {
    throw InternalError(fmt::format(
        "J transform routes disagree at p={}, z={}: direct {:.17g}, tilted {:.17g}", p, z,
        direct, tilted));
  }
  return direct;
}

double j_transform_tilted(double p, const DelaySpec& delay, double z) {
  if (!(z > 1.0 - p)) {
    throw DomainError(fmt::format("E z^-J diverges for z = {} <= 1 - p = {}", z, 1.0 - p));
  }
  const double p_hat = p * z / (1.0 - p + p * z);
  const double log_ratio = std::log(p / p_hat);
  // sum_r (p/p_hat)^r P(R_{p_hat} = r), each term assembled in log space.
  double log_tail = 0.0;  // log P(R_{p_hat} > r-1)
  double sum = 0.0;
  for (std::int64_t r = 1; r < kMaxSeriesTerms; ++r) {
    const double cdf = delay.cdf(r);
    if (cdf > 0.0) {
      sum += std::exp(static_cast<double>(r) * log_ratio + std::log(p_hat * cdf) + log_tail);
    }
    log_tail += std::log1p(-p_hat * cdf);
    const double c_next = std::exp(log_ratio + std::log1p(-p_hat * delay.cdf(r + 1)));
    const double head = std::exp(static_cast<double>(r) * log_ratio + log_tail);
    if (c_next < 1.0 && head * p * c_next / (1.0 - c_next) < 1e-16 * std::max(1.0, sum)) {
      return sum;
    }
    if (!std::isfinite(log_tail)) return sum;
  }
  throw InternalError(fmt::format("tilted series failed to converge at p={}, z={}", p, z));
}

double gamma_from(double j0, double z_star) { return (1.0 - j0) / (1.0 - j0 * z_star); }

double gamma_rate(double p, const DelaySpec& delay, double tol) {
  const double z = z_star(p, delay, tol).value;
  return gamma_from(RenewalLaw(p, delay).j0().value, z);
}

ThresholdReport solve_thresholds(double p, const DelaySpec& delay, double tol) {
  const auto pc = p_critical(delay, tol);
  if (!(p > pc.value)) {
    throw PreconditionError(fmt::format("p = {} is not above the security threshold p_c = {:.9f}",
                                        p, pc.value),
                            pc.value);
  }
  const RenewalLaw law(p, delay);
  const auto zs = solve_z_star(p, delay, tol);
  const double j0 = law.j0().value;
  ThresholdReport report{p,
                         delay,
                         pc.value,
                         zs.value,
                         j0,
                         gamma_from(j0, zs.value),
                         pc.diagnostics.iterations + zs.diagnostics.iterations,
                         pc.diagnostics.residual,
                         zs.diagnostics.residual,
                         zs.value * j_transform(p, delay, zs.value) - 1.0};
  return report;
}

}  // namespace cclock
