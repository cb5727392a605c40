#include <cmath>
#include <vector>

#include "cclock/errors.hpp"
#include "cclock/mm1.hpp"
#include "cclock/rng.hpp"
#include "doctest.h"

using cclock::BitcoinParams;
namespace mm1 = cclock::mm1;

namespace {

// Density of the time to consensus from a tie, written as a series of modified
// Bessel functions (first-passage densities of the birth-death walk). Shares no
// code with the transforms.
class TieDensity {
 public:
  explicit TieDensity(const BitcoinParams& bp)
      : lambda_(bp.lambda), mu_(bp.mu), rho_(bp.rho) {}

  double operator()(double t) const {
    const double total = lambda_ + mu_;
    if (t == 0.0) return (1.0 - rho_) * mu_;
    const double x = 2.0 * std::sqrt(lambda_ * mu_) * t;
    double sum = 0.0;
    for (int k = 0;; ++k) {
      const double n = 2.0 * k + 1.0;
      const double term = n * std::cyl_bessel_i(n, x) * std::exp(-total * t);
      sum += term;
      if (n > x && term < 1e-17 * sum) break;
    }
    return (1.0 - rho_) / std::sqrt(rho_) * sum / t;
  }

 private:
  double lambda_, mu_, rho_;
};

struct Moments {
  double mass, mean;
};

// Composite Simpson on [0, t_max] of f and t f.
Moments integrate(const TieDensity& f, double t_max, double h) {
  const auto n = static_cast<int>(t_max / h) & ~1;
  double m0 = 0.0, m1 = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double v = f(t);
    m0 += w * v;
    m1 += w * t * v;
  }
  return {m0 * h / 3.0, m1 * h / 3.0};
}

double survival(const TieDensity& f, double t, double h = 0.05) {
  const auto n = static_cast<int>(t / h) & ~1;
  const double step = t / n;
  double m0 = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    m0 += w * f(i * step);
  }
  return 1.0 - m0 * step / 3.0;
}

const BitcoinParams kRaw = BitcoinParams::from_rates(1.0, 2.0);

}  // namespace

TEST_CASE("busy transform examples") {
  CHECK(mm1::busy_lt(kRaw, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kRaw.s_star == doctest::Approx(3.0 - 2.0 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(mm1::busy_lt(kRaw, -kRaw.s_star) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(mm1::busy_lt(kRaw, 1.0) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(mm1::busy_lt(kRaw, -kRaw.s_star - 1e-6), cclock::DomainError);
}

TEST_CASE("component transforms") {
  CHECK(mm1::cycle_lt(kRaw, 1.0) == doctest::Approx((2.0 - std::sqrt(2.0)) / 2).epsilon(1e-14));
  for (const auto& bp : {kRaw, BitcoinParams::from_protocol(0.72, 0.9),
                         BitcoinParams::from_protocol(0.95, 0.9)}) {
    CHECK(std::abs(mm1::busy_lt(bp, 0.0) - 1) < 1e-12);
    CHECK(std::abs(mm1::cycle_lt(bp, 0.0) - 1) < 1e-12);
    CHECK(std::abs(mm1::residual_lt(bp, 0.0) - 1) < 1e-12);
    CHECK(std::abs(mm1::unstable_cycle_lt(bp, 0.0) - 1) < 1e-12);
    CHECK(std::abs(mm1::kappa_lt(bp, 0.0) - 1) < 1e-12);
    CHECK(std::abs(mm1::ttc_lt(bp, 0.0) - 1) < 1e-12);
    CHECK(std::abs(mm1::ttc_lt(bp, 0.0, cclock::StartState::stationary) - 1) < 1e-12);
    CHECK(std::abs(mm1::displayed_ttc_lt(bp, 0.0) - 1) < 1e-12);
    CHECK(std::abs(mm1::residual_lt(bp, 1e-8 * bp.rate_scale) - 1) < 1e-6);
  }
}

TEST_CASE("residual transform is continuous across the series switch") {
  const auto bp = BitcoinParams::from_protocol(0.72, 0.9);
  const double cut = 1e-10 * bp.rate_scale;
  const double below = mm1::residual_lt(bp, 0.999 * cut);
  const double above = mm1::residual_lt(bp, 1.001 * cut);
  CHECK(std::abs(below - above) < 1e-12);
  // Against the textbook ratio well away from zero.
  const double s = 0.3 * bp.rate_scale;
  CHECK(mm1::residual_lt(bp, s) ==
        doctest::Approx((bp.mu - bp.lambda) * (1 - mm1::busy_lt(bp, s)) / s).epsilon(1e-12));
}

TEST_CASE("busy transform solves its quadratic") {
  for (const auto& bp : {kRaw, BitcoinParams::from_protocol(0.8, 0.9)}) {
    for (double u = -0.99; u <= 10.0; u += 0.37) {
      const double s = u > 0 ? u * bp.rate_scale : u * bp.s_star;
      const double b = mm1::busy_lt(bp, s);
      const double scale = bp.lambda + bp.mu + std::abs(s);
      CHECK(std::abs(bp.lambda * b * b - (bp.lambda + bp.mu + s) * b + bp.mu) < 1e-10 * scale);
    }
  }
}

TEST_CASE("branch point identity for random valid parameters") {
  cclock::Rng rng(99);
  int tried = 0;
  while (tried < 20) {
    const double p = 0.5 + 0.499 * rng.uniform();
    const double q = 0.2 + 0.8 * rng.uniform();
    if (p * q <= 1 - p) continue;
    ++tried;
    const auto bp = BitcoinParams::from_protocol(p, q);
    CHECK(std::abs(mm1::busy_lt(bp, -bp.s_star) - 1 / std::sqrt(bp.rho)) < 1e-9);
    CHECK(bp.theta > 0.0);
    CHECK(bp.theta < 0.5);
    CHECK(bp.s_star > 0.0);
  }
}

TEST_CASE("protocol parameters") {
  const auto bp = BitcoinParams::from_protocol(0.72, 0.9, 0.1);
  CHECK(bp.lambda + bp.mu == doctest::Approx(0.1));
  CHECK(bp.rho == doctest::Approx(0.28 / (0.72 * 0.9)));
  CHECK(bp.theta == doctest::Approx(0.42137).epsilon(1e-4));
  try {
    BitcoinParams::from_protocol(0.5, 0.9);
    FAIL("expected a precondition error");
  } catch (const cclock::PreconditionError& e) {
    CHECK(e.p_critical() == doctest::Approx(1 / 1.9));
  }
  CHECK_THROWS_AS(BitcoinParams::from_protocol(0.7, 0.0), cclock::DomainError);
  CHECK_THROWS_AS(BitcoinParams::from_rates(2.0, 1.0), cclock::DomainError);
  CHECK(cclock::parse_start_state("stationary") == cclock::StartState::stationary);
  CHECK_THROWS_AS(cclock::parse_start_state("warm"), cclock::InputError);
}

TEST_CASE("pole function endpoint signs and the published pole") {
  const auto bp = BitcoinParams::from_protocol(0.72, 0.9);
  const double left = std::sqrt(2 * bp.theta) - 1;
  CHECK(mm1::pole_function(bp.theta, 0.0) > 0.0);
  CHECK(mm1::pole_function(bp.theta, left) < 0.0);
  const auto pole = mm1::dominant_pole(bp);
  CHECK(pole.s_star_star > 0.0);
  CHECK(pole.s_star_star < bp.s_star);
  CHECK(std::abs(mm1::displayed_denominator(bp, -pole.s_star_star)) < 1e-9);
  // Pole function is the scaled denominator.
  for (double x : {left, 0.5 * left, -0.01, 0.0, 0.5}) {
    const double rate = bp.lambda + bp.mu;
    CHECK(mm1::pole_function(bp.theta, x) ==
          doctest::Approx(2 * mm1::displayed_denominator(bp, rate * x) / (rate * rate))
              .epsilon(1e-9));
  }
}

TEST_CASE("sign-scan oracle reproduces the published pole") {
  const auto bp = BitcoinParams::from_protocol(0.72, 0.9);
  const double left = std::sqrt(2 * bp.theta) - 1;
  constexpr int n = 1'000'000;
  const double dx = -left / n;
  double prev = mm1::pole_function(bp.theta, left);
  double root = NAN;
  int changes = 0;
  for (int i = 1; i <= n; ++i) {
    const double x = left + i * dx;
    const double g = mm1::pole_function(bp.theta, x);
    if ((prev < 0) != (g < 0)) {
      ++changes;
      root = x - 0.5 * dx;
    }
    prev = g;
  }
  CHECK(changes == 1);
  const double oracle = -(bp.lambda + bp.mu) * root;
  CHECK(std::abs(mm1::dominant_pole(bp).s_star_star - oracle) < 1e-8);
  CHECK(oracle == doctest::Approx(0.0031214).epsilon(1e-4));
}

TEST_CASE("published denominator is positive up to the pole") {
  for (double p = 0.72; p <= 0.99 + 1e-9; p += 0.01) {
    const auto bp = BitcoinParams::from_protocol(p, 0.9);
    const double s2 = mm1::dominant_pole(bp).s_star_star;
    CHECK(s2 < bp.s_star);
    for (int i = 0; i < 100; ++i) {
      const double s = -s2 + s2 * (i + 1) / 100.0;
      if (!(mm1::displayed_denominator(bp, s) > 0.0)) FAIL_CHECK("p=" << p << " s=" << s);
    }
  }
}

TEST_CASE("published transform forms agree on a log grid") {
  const auto bp = BitcoinParams::from_protocol(0.8, 0.9);
  for (int i = 0; i <= 60; ++i) {
    const double s = bp.rate_scale * std::pow(10.0, -5.0 + 6.0 * i / 60.0);
    CHECK_NOTHROW(mm1::displayed_ttc_lt(bp, s));
  }
  CHECK_THROWS_AS(mm1::displayed_ttc_lt(bp, -mm1::dominant_pole(bp).s_star_star),
                  cclock::DomainError);
}

TEST_CASE("time-to-consensus transform is a decreasing Laplace transform") {
  for (auto start : {cclock::StartState::tie, cclock::StartState::stationary}) {
    const auto bp = BitcoinParams::from_protocol(0.72, 0.9);
    double previous = 1.0;
    for (int i = 1; i <= 100; ++i) {
      const double s = bp.rate_scale * 0.01 * i;
      const double v = mm1::ttc_lt(bp, s, start);
      CHECK(v > 0.0);
      CHECK(v < previous);
      previous = v;
    }
    CHECK_THROWS_AS(mm1::ttc_lt(bp, -bp.s_star, start), cclock::DomainError);
    CHECK(std::isfinite(mm1::ttc_lt(bp, -0.999 * bp.s_star, start)));
  }
}

TEST_CASE("means") {
  const auto bp72 = BitcoinParams::from_protocol(0.72, 0.9);
  const double m72 = mm1::ttc_mean(bp72);
  CHECK(m72 >= 54.0);
  CHECK(m72 <= 66.0);
  CHECK(m72 == doctest::Approx((1 + bp72.rho) / ((1 - bp72.rho) * (bp72.mu - bp72.lambda))));
  CHECK(mm1::ttc_mean(BitcoinParams::from_protocol(0.9, 0.9)) < m72);
  CHECK(mm1::ttc_mean(bp72, cclock::StartState::stationary) ==
        doctest::Approx(3 * bp72.rho / ((1 - bp72.rho) * (bp72.mu - bp72.lambda))));
  // The published transform's mean, reported only.
  CHECK(mm1::displayed_ttc_mean(bp72) == doctest::Approx(152.04).epsilon(1e-3));
}

TEST_CASE("tail exponent is the branch point and positive") {
  for (double p = 0.72; p <= 0.99 + 1e-9; p += 0.03) {
    const auto bp = BitcoinParams::from_protocol(p, 0.9);
    CHECK(mm1::tail_exponent(bp) == bp.s_star);
    CHECK(mm1::tail_exponent(bp) > 0.0);
  }
}

TEST_CASE("independent density oracle") {
  SUBCASE("mass and mean at p = 0.72") {
    const auto bp = BitcoinParams::from_protocol(0.72, 0.9);
    const TieDensity f(bp);
    const auto m = integrate(f, 5000.0, 0.5);
    CHECK(std::abs(m.mass - 1.0) < 1e-7);
    CHECK(m.mean == doctest::Approx(mm1::ttc_mean(bp)).epsilon(1e-6));
    CHECK(m.mean == doctest::Approx(63.5917).epsilon(1e-5));
    // Transform at one point.
    const double s = 0.05 * bp.rate_scale;
    double lt = 0.0;
    const double h = 0.5;
    for (int i = 0; i <= 10000; ++i) {
      const double w = (i == 0 || i == 10000) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      lt += w * std::exp(-s * i * h) * f(i * h);
    }
    CHECK(lt * h / 3 == doctest::Approx(mm1::ttc_lt(bp, s)).epsilon(1e-7));
  }
  SUBCASE("exceedance of 60 minutes") {
    const TieDensity f84(BitcoinParams::from_protocol(0.84, 0.9));
    const TieDensity f89(BitcoinParams::from_protocol(0.89, 0.9));
    CHECK(survival(f84, 60.0) == doctest::Approx(0.0981).epsilon(2e-3));
    CHECK(survival(f89, 60.0) == doctest::Approx(0.0473).epsilon(3e-3));
  }
}
