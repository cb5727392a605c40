#pragma once

#include <cstdint>

#include "cclock/delay.hpp"
#include "cclock/rng.hpp"

namespace cclock {

/// Value of a truncated series together with a bound on the discarded tail.
struct SeriesValue {
  double value;
  double error_bound;
  std::int64_t terms;
};

/// Inter-renewal time R_p of the honest height process:
///   P(R_p > r) = prod_{i=1}^{r} (1 - p + p P(xi > i)).
class RenewalLaw {
 public:
  static constexpr double kMinP = 0.01;
  static constexpr double kMaxP = 0.999;

  RenewalLaw(double p, DelaySpec delay, double truncation_eps = 1e-14);

  double p() const noexcept { return p_; }
  const DelaySpec& delay() const noexcept { return delay_; }
  double truncation_eps() const noexcept { return eps_; }

  /// P(R_p > r).
  double tail(std::int64_t r) const noexcept;

  /// P(R_p = r) = p P(xi <= r) prod_{i<r} (1 - p P(xi <= i)).
  double pmf(std::int64_t r) const noexcept;

  /// E R_p, summed until the envelope (1-p)^(r+1-r_p)/p of the remainder drops below eps.
  SeriesValue mean() const noexcept;

  /// r_p = ceil(p E(xi - 1) / |(1-p) log(1-p)|); P(R_p > r) <= (1-p)^(r - r_p) for r >= r_p.
  std::int64_t domination_offset() const noexcept;

  /// j_0 = E p^{R_1}: probability that a service sees no adversarial step.
  SeriesValue j0() const noexcept;

  /// Step-wise draw: success at step i with probability p P(xi <= i).
  std::int64_t sample(Rng& rng) const noexcept;

 private:
  double p_;
  DelaySpec delay_;
  double eps_;
};

/// P(R_p > r) without the range check on p; shared by tilted evaluations.
double renewal_tail(double p, const DelaySpec& delay, std::int64_t r) noexcept;

}  // namespace cclock
