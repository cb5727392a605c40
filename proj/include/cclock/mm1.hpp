#pragma once

#include <string>

namespace cclock {

/// Initial condition of the stylized walk W = A - H.
///   tie:        W_0 = 0 (the attacked block has just been matched).
///   stationary: W_0 + 1 ~ Geom_0(rho), the reflected queue's stationary law.
enum class StartState { tie, stationary };

std::string to_string(StartState s);
StartState parse_start_state(const std::string& text);

/// Rates of the stylized Bitcoin model on a Poisson clock of rate lambda + mu.
struct BitcoinParams {
  double p = 0.0;  // NaN in raw mode
  double q = 0.0;  // NaN in raw mode
  double rate_scale = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double rho = 0.0;
  double p_hat = 0.0;
  double theta = 0.0;
  double s_star = 0.0;

  /// lambda = r (1-p)/((1-p)+pq), mu = r pq/((1-p)+pq). Requires pq > 1-p.
  static BitcoinParams from_protocol(double p, double q, double rate_scale = 0.1);

  /// Raw mode: rates given directly, rate_scale = lambda + mu.
  static BitcoinParams from_rates(double lambda, double mu);
};

namespace mm1 {

/// Busy-period transform B(s), s >= -s_*.
double busy_lt(const BitcoinParams& bp, double s);

/// Phi(s) = lambda B(s) / (lambda + s).
double cycle_lt(const BitcoinParams& bp, double s);

/// Psi(s) = (mu - lambda)(1 - B(s)) / s, with Psi(0) = 1.
double residual_lt(const BitcoinParams& bp, double s);

/// Gamma(s) = mu B(s) / (mu + s).
double unstable_cycle_lt(const BitcoinParams& bp, double s);

/// Published kappa(s) = (1-p_hat) Gamma(s) / (1 - p_hat Phi(s)).
double kappa_lt(const BitcoinParams& bp, double s);

/// Published denominator D(s) = (lambda+s)(mu+s) - lambda p_hat B(s) (mu(1+rho^2) + (1+rho)s).
double displayed_denominator(const BitcoinParams& bp, double s);

/// g(x) = x^2 + theta x + 2theta - 1 + (1+x-theta) sqrt((1+x)^2 - 2theta);
/// equals 2 D((lambda+mu)x) / (lambda+mu)^2.
double pole_function(double theta, double x);

struct PoleResult {
  double s_star_star;
  double x_star;
  int iterations;
};

/// Root of g on [sqrt(2 theta) - 1, 0], mapped to s_** = -(lambda+mu) x_*.
PoleResult dominant_pole(const BitcoinParams& bp, double tol = 1e-14);

/// Published transform (rho Psi + 1 - rho)(1 - rho)/(1 - rho kappa), evaluated in
/// both the kappa form and the expanded form over D(s); throws if they differ by 1e-9.
double displayed_ttc_lt(const BitcoinParams& bp, double s);

/// E B(s)^{W_0 + 1}: transform of the time until the initial lead first resolves.
double lead_lt(const BitcoinParams& bp, double s, StartState start);

/// Transform of the time to consensus,
///   lead(s) (1 - rho) / (1 - rho B(s)^2),  s > -s_*.
/// Each of the geometric number of later violations costs an honest-lead excursion
/// back to a tie (transform B under the conditioning) and a busy period (B).
/// Cross-checked against the partial sums of the geometric series.
double ttc_lt(const BitcoinParams& bp, double s, StartState start = StartState::tie);

/// Mean from the component means:
///   E lead + 2 rho / ((1 - rho)(mu - lambda)).
double ttc_mean_closed_form(const BitcoinParams& bp, StartState start = StartState::tie);

/// -d/ds of ttc_lt at 0 by Richardson-extrapolated central differences,
/// h = 1e-5 rate_scale. Throws InternalError if it differs from the closed form by > 0.1%.
double ttc_mean(const BitcoinParams& bp, StartState start = StartState::tie);

/// -d/ds of the published transform at 0 (numerical).
double displayed_ttc_mean(const BitcoinParams& bp);

/// Exponential decay rate of P(tau_C > x) ~ c x^{-1/2} e^{-s_* x}: the branch point s_*.
double tail_exponent(const BitcoinParams& bp);

}  // namespace mm1
}  // namespace cclock
