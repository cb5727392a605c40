#include "cclock/mm1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cclock/bisection.hpp"
#include "cclock/errors.hpp"

namespace cclock {

std::string to_string(StartState s) { return s == StartState::tie ? "tie" : "stationary"; }

StartState parse_start_state(const std::string& text) {
  if (text == "tie") return StartState::tie;
  if (text == "stationary") return StartState::stationary;
  throw InputError(fmt::format("unknown start state '{}' (expected tie or stationary)", text),
                   "start");
}

BitcoinParams BitcoinParams::from_protocol(double p, double q, double rate_scale) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError(fmt::format("p = {} outside (0, 1]", p));
  if (!(q > 0.0 && q <= 1.0)) throw DomainError(fmt::format("q = {} outside (0, 1]", q));
  if (!(rate_scale > 0.0)) throw DomainError("rate_scale must be positive");
  if (!(p * q > 1.0 - p)) {
    // p q > 1 - p  <=>  p > 1 / (1 + q).
    throw PreconditionError(
        fmt::format("security threshold fails: p q = {} <= 1 - p = {}", p * q, 1.0 - p),
        1.0 / (1.0 + q));
  }
  const double total = (1.0 - p) + p * q;
  BitcoinParams bp = from_rates(rate_scale * (1.0 - p) / total, rate_scale * p * q / total);
  bp.p = p;
  bp.q = q;
  bp.rate_scale = rate_scale;
  return bp;
}

BitcoinParams BitcoinParams::from_rates(double lambda, double mu) {
  if (!(lambda >= 0.0 && mu > lambda)) {
    throw DomainError(fmt::format("need 0 <= lambda < mu, got lambda = {}, mu = {}", lambda, mu));
  }
  BitcoinParams bp;
  bp.p = std::numeric_limits<double>::quiet_NaN();
  bp.q = std::numeric_limits<double>::quiet_NaN();
  bp.lambda = lambda;
  bp.mu = mu;
  bp.rate_scale = lambda + mu;
  bp.rho = lambda / mu;
  bp.p_hat = mu / (lambda + mu);
  bp.theta = 2.0 * bp.p_hat * (1.0 - bp.p_hat);
  bp.s_star = (lambda + mu) - 2.0 * std::sqrt(lambda * mu);
  return bp;
}

namespace mm1 {

namespace {

// sqrt((lambda+mu+s)^2 - 4 lambda mu), guarded at the branch point.
double discriminant_root(const BitcoinParams& bp, double s) {
  if (s < -bp.s_star) {
    const double slack = 1e-12 * bp.rate_scale;
    if (s < -bp.s_star - slack) {
      throw DomainError(fmt::format("s = {} below the branch point -s_* = {}", s, -bp.s_star));
    }
    return 0.0;
  }
  const double a = bp.lambda + bp.mu + s;
  // (a - 2 sqrt(lm)) (a + 2 sqrt(lm)) avoids cancellation near -s_*.
  const double r = 2.0 * std::sqrt(bp.lambda * bp.mu);
  return std::sqrt(std::max(0.0, (a - r) * (a + r)));
}

}  // namespace

double busy_lt(const BitcoinParams& bp, double s) {
  const double root = discriminant_root(bp, s);
  // Rationalized (a - root)/(2 lambda); stays finite as lambda -> 0.
  return 2.0 * bp.mu / (bp.lambda + bp.mu + s + root);
}

double cycle_lt(const BitcoinParams& bp, double s) {
  return bp.lambda * busy_lt(bp, s) / (bp.lambda + s);
}

double residual_lt(const BitcoinParams& bp, double s) {
  const double drift = bp.mu - bp.lambda;
  if (std::abs(s) < 1e-10 * bp.rate_scale) return 1.0 - bp.mu * s / (drift * drift);
  const double root = discriminant_root(bp, s);
  // 1 - B(s) = 4 mu s / ((root + mu - lambda - s)(lambda + mu + s + root)).
  return drift * 4.0 * bp.mu / ((root + drift - s) * (bp.lambda + bp.mu + s + root));
}

double unstable_cycle_lt(const BitcoinParams& bp, double s) {
  return bp.mu * busy_lt(bp, s) / (bp.mu + s);
}

double kappa_lt(const BitcoinParams& bp, double s) {
  const double denom = 1.0 - bp.p_hat * cycle_lt(bp, s);
  if (!(denom > 1e-300)) throw DomainError(fmt::format("kappa has a pole at s = {}", s));
  return (1.0 - bp.p_hat) * unstable_cycle_lt(bp, s) / denom;
}

double displayed_denominator(const BitcoinParams& bp, double s) {
  const double b = busy_lt(bp, s);
  return (bp.lambda + s) * (bp.mu + s) -
         bp.lambda * bp.p_hat * b * (bp.mu * (1.0 + bp.rho * bp.rho) + (1.0 + bp.rho) * s);
}

double pole_function(double theta, double x) {
  const double disc = (1.0 + x) * (1.0 + x) - 2.0 * theta;
  if (disc < -1e-15) {
    throw DomainError(fmt::format("g(x) undefined at x = {} for theta = {}", x, theta));
  }
  return x * x + theta * x + 2.0 * theta - 1.0 +
         (1.0 + x - theta) * std::sqrt(std::max(0.0, disc));
}

PoleResult dominant_pole(const BitcoinParams& bp, double tol) {
  if (!(bp.theta > 0.0 && bp.theta < 0.5)) {
    throw DomainError(fmt::format("dominant pole needs theta in (0, 1/2), got {}", bp.theta));
  }
  const double lo = std::sqrt(2.0 * bp.theta) - 1.0;
  const double g_lo = pole_function(bp.theta, lo);
  const double g_hi = pole_function(bp.theta, 0.0);
  if (!(g_lo < 0.0 && g_hi > 0.0)) {
    throw InternalError(fmt::format("g has no sign change on [{}, 0]: g = {}, {}", lo, g_lo, g_hi));
  }
  const auto res = bisect([&](double x) { return pole_function(bp.theta, x); }, lo, 0.0,
                          {tol, 0.0, 400});
  const double s2 = -(bp.lambda + bp.mu) * res.root;
  if (!(s2 > 0.0 && s2 < bp.s_star)) {
    throw InternalError(fmt::format("pole s_** = {} outside (0, s_* = {})", s2, bp.s_star));
  }
  return {s2, res.root, res.iterations};
}

double displayed_ttc_lt(const BitcoinParams& bp, double s) {
  const double head = (bp.rho * residual_lt(bp, s) + 1.0 - bp.rho) * (1.0 - bp.rho);
  const double den_kappa = 1.0 - bp.rho * kappa_lt(bp, s);
  const double d = displayed_denominator(bp, s);
  if (!(den_kappa > 0.0 && d > 0.0)) {
    throw DomainError(fmt::format("s = {} at or beyond the published pole -s_**", s));
  }
  const double kappa_form = head / den_kappa;
  const double b = busy_lt(bp, s);
  const double expanded =
      head * (bp.mu + s) * ((bp.lambda + s) - bp.p_hat * bp.lambda * b) / d;
  if (std::abs(kappa_form - expanded) > 1e-9 * std::max(1.0, std::abs(kappa_form))) {
    throw InternalError(fmt::format("published transform forms disagree at s = {}: {} vs {}", s,
                                    kappa_form, expanded));
  }
  return kappa_form;
}

double lead_lt(const BitcoinParams& bp, double s, StartState start) {
  const double b = busy_lt(bp, s);
  if (start == StartState::tie) return b;
  const double geometric = (1.0 - bp.rho) / (1.0 - bp.rho * b);
  // The same law through the published residual transform.
  const double via_residual = bp.rho * residual_lt(bp, s) + 1.0 - bp.rho;
  if (std::abs(geometric - via_residual) > 1e-9 * std::max(1.0, geometric)) {
    throw InternalError(fmt::format("stationary lead transforms disagree at s = {}: {} vs {}", s,
                                    geometric, via_residual));
  }
  return geometric;
}

double ttc_lt(const BitcoinParams& bp, double s, StartState start) {
  if (!(s > -bp.s_star)) {
    throw DomainError(fmt::format("ttc transform needs s > -s_* = {}, got {}", -bp.s_star, s));
  }
  const double b = busy_lt(bp, s);
  const double ratio = bp.rho * b * b;
  const double lead = lead_lt(bp, s, start);
  const double closed = lead * (1.0 - bp.rho) / (1.0 - ratio);
  if (ratio <= 0.99) {
    // sum_k (1 - rho) ratio^k, one term per later violation.
    double term = (1.0 - bp.rho) * lead;
    double series = 0.0;
    for (int k = 0; k < 100000 && term > 1e-18 * (series + term); ++k) {
      series += term;
      term *= ratio;
    }
    if (std::abs(series - closed) > 1e-9 * std::max(1.0, closed)) {
      throw InternalError(
          fmt::format("ttc transform routes disagree at s = {}: {} vs {}", s, closed, series));
    }
  }
  return closed;
}

double ttc_mean_closed_form(const BitcoinParams& bp, StartState start) {
  const double busy_mean = 1.0 / (bp.mu - bp.lambda);
  const double lead_mean =
      start == StartState::tie ? busy_mean : bp.rho / (1.0 - bp.rho) * busy_mean;
  return lead_mean + 2.0 * bp.rho / (1.0 - bp.rho) * busy_mean;
}

namespace {

// h is capped at a quarter of the distance to the nearest singularity.
template <class F>
double richardson_negative_slope(F&& f, const BitcoinParams& bp, double singularity) {
  const double h = std::min(1e-5 * bp.rate_scale, 0.25 * singularity);
  auto central = [&](double step) { return (f(-step) - f(step)) / (2.0 * step); };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

}  // namespace

double ttc_mean(const BitcoinParams& bp, StartState start) {
  const double numeric =
      richardson_negative_slope([&](double s) { return ttc_lt(bp, s, start); }, bp, bp.s_star);
  const double closed = ttc_mean_closed_form(bp, start);
  if (std::abs(numeric - closed) > 1e-3 * closed) {
    throw InternalError(
        fmt::format("ttc mean: numerical {} and closed form {} differ by > 0.1%", numeric, closed));
  }
  return numeric;
}

double displayed_ttc_mean(const BitcoinParams& bp) {
  return richardson_negative_slope([&](double s) { return displayed_ttc_lt(bp, s); }, bp,
                                   dominant_pole(bp).s_star_star);
}

double tail_exponent(const BitcoinParams& bp) { return bp.s_star; }

}  // namespace mm1
}  // namespace cclock
