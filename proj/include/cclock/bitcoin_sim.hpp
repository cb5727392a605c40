#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cclock/mm1.hpp"
#include "cclock/rng.hpp"
#include "cclock/stats.hpp"

namespace cclock::bitcoin {

/// When to stop watching a replica.
///   paper_proxy: after `proxy_blocks` consecutive events with H > A since the last violation.
///   lead_cap:    once the honest lead d satisfies rho^d < lead_eps.
struct StopRule {
  enum class Kind { paper_proxy, lead_cap };
  Kind kind = Kind::paper_proxy;
  std::int64_t proxy_blocks = 1000;
  double lead_eps = 1e-10;

  static StopRule paper_proxy(std::int64_t blocks = 1000) {
    return {Kind::paper_proxy, blocks, 1e-10};
  }
  static StopRule lead_cap(double eps = 1e-10) { return {Kind::lead_cap, 1000, eps}; }
};

const char* to_string(StopRule::Kind kind);

struct StylizedTrace {
  std::vector<double> event_times;  // minutes; empty unless recorded
  std::vector<std::int64_t> q_path;  // Q after each event; empty unless recorded
  double tau_c = 0.0;
  StopRule::Kind stopped_by = StopRule::Kind::paper_proxy;
  std::int64_t events = 0;
};

/// Draws W_0 = A_0 - H_0 for the given start state.
std::int64_t draw_initial_lead(const BitcoinParams& bp, StartState start, Rng& rng);

/// One replica of W = A - H on the Poisson clock of rate lambda + mu, started at
/// W_0 = initial_w. A violation is W >= 0; tau_c is the time of the event that
/// takes W from 0 to -1 for the last time, or 0 if W_0 < 0 and W never reaches 0.
StylizedTrace simulate_replica(const BitcoinParams& bp, Rng& rng, const StopRule& stop,
                               std::int64_t initial_w, bool record_path = false);

/// As above with W_0 drawn from `start`.
StylizedTrace simulate_replica(const BitcoinParams& bp, Rng& rng, const StopRule& stop,
                               StartState start = StartState::tie, bool record_path = false);

struct EnsembleOptions {
  std::size_t n = 25'000;
  std::uint64_t master_seed = 0;
  StopRule stop = StopRule::paper_proxy();
  StartState start = StartState::tie;
  double threshold_min = 60.0;
  unsigned jobs = 0;  // 0: all cores
};

struct EnsembleSummary {
  std::size_t n = 0;
  double mean_ttc = 0.0;
  double std_error = 0.0;
  double exceed_frac = 0.0;
  double threshold_min = 60.0;
  std::uint64_t master_seed = 0;
  std::vector<double> samples;  // tau_c by replica index
  std::vector<double> ecdf;     // samples sorted ascending
};

EnsembleSummary run_ensemble(const BitcoinParams& bp, const EnsembleOptions& opt);

struct TailPoint {
  double t;
  double log_survival;
  std::size_t count;
};

/// log P(tau_C > t) at grid points with at least `min_count` exceeding samples.
std::vector<TailPoint> empirical_tail(const EnsembleSummary& summary, std::span<const double> grid,
                                      std::size_t min_count = 10);

/// `points` equally spaced times on [0, max sample].
std::vector<double> default_tail_grid(const EnsembleSummary& summary, std::size_t points = 300);

struct TailSlope {
  double exponent;  // fitted decay rate s in P(tau > t) ~ c t^{-1/2} e^{-s t}
  double std_error;
  std::size_t points;
};

/// Count-weighted fit of log S(t) + log(t)/2 = c - s t - a/t over grid points
/// with S(t) <= max_survival and at least min_count exceedances.
TailSlope fit_tail_exponent(const EnsembleSummary& summary, std::size_t grid_points = 300,
                            double max_survival = 0.5, std::size_t min_count = 10);

/// Empirical E exp(-s L) over `n_periods` busy periods (W from 0 until W = -1).
struct BusyPeriodEstimate {
  std::vector<double> laplace;
  std::vector<double> laplace_std_error;
  double mean_length = 0.0;
  double mean_length_std_error = 0.0;
};
BusyPeriodEstimate busy_period_oracle(const BitcoinParams& bp, std::size_t n_periods,
                                      std::span<const double> s_values, Rng& rng);

/// Reflected queue Q = max(Q +- 1, -1) after `events` steps from Q_0 = q0.
std::int64_t reflected_queue_after(const BitcoinParams& bp, std::int64_t q0, std::int64_t events,
                                   Rng& rng);

}  // namespace cclock::bitcoin
