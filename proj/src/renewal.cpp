#include "cclock/renewal.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cclock/errors.hpp"

namespace cclock {

double renewal_tail(double p, const DelaySpec& delay, std::int64_t r) noexcept {
  if (r <= 0) return 1.0;
  // Log-space product; beyond a finite support every factor is 1 - p.
  const auto top = delay.support_max();
  const std::int64_t explicit_end = top ? std::min<std::int64_t>(r, *top) : r;
  double log_tail = 0.0;
  for (std::int64_t i = 1; i <= explicit_end; ++i) {
    log_tail += std::log1p(-p * delay.cdf(i));
  }
  if (r > explicit_end) log_tail += static_cast<double>(r - explicit_end) * std::log1p(-p);
  return std::exp(log_tail);
}

RenewalLaw::RenewalLaw(double p, DelaySpec delay, double truncation_eps)
    : p_(p), delay_(std::move(delay)), eps_(truncation_eps) {
  if (!(p >= kMinP && p <= kMaxP)) {
    throw DomainError(fmt::format("p = {} outside the supported range [{}, {}]", p, kMinP, kMaxP));
  }
  if (!(truncation_eps > 0.0)) throw DomainError("truncation_eps must be positive");
}

double RenewalLaw::tail(std::int64_t r) const noexcept { return renewal_tail(p_, delay_, r); }

double RenewalLaw::pmf(std::int64_t r) const noexcept {
  if (r <= 0) return 0.0;
  return p_ * delay_.cdf(r) * tail(r - 1);
}

SeriesValue RenewalLaw::mean() const noexcept {
  const double log_q = std::log1p(-p_);
  const auto r_p = static_cast<double>(domination_offset());
  double sum = 0.0;
  double tail_r = 1.0;  // P(R > r)
  std::int64_t r = 0;
  for (;;) {
    sum += tail_r;
    const double envelope = std::exp((static_cast<double>(r) + 1.0 - r_p) * log_q) / p_;
    if (envelope < eps_ || tail_r == 0.0) {
      return {sum, tail_r == 0.0 ? 0.0 : envelope, r + 1};
    }
    ++r;
    tail_r *= 1.0 - p_ * delay_.cdf(r);
  }
}

std::int64_t RenewalLaw::domination_offset() const noexcept {
  const double excess = delay_.mean() - 1.0;
  if (excess <= 0.0) return 0;
  const double denom = std::abs((1.0 - p_) * std::log1p(-p_));
  return static_cast<std::int64_t>(std::ceil(p_ * excess / denom));
}

SeriesValue RenewalLaw::j0() const noexcept {
  double sum = 0.0;
  double survive = 1.0;  // prod_{i<r} P(xi > i)
  double p_pow = 1.0;
  std::int64_t r = 1;
  for (;; ++r) {
    p_pow *= p_;
    sum += p_pow * delay_.cdf(r) * survive;
    survive *= delay_.ccdf(r);
    // Remaining terms are bounded by survive * sum_{k>r} p^k.
    const double bound = survive * p_pow * p_ / (1.0 - p_);
    if (bound < eps_) return {sum, bound, r};
  }
}

std::int64_t RenewalLaw::sample(Rng& rng) const noexcept {
  for (std::int64_t i = 1;; ++i) {
    if (rng.uniform() < p_ * delay_.cdf(i)) return i;
  }
}

}  // namespace cclock
