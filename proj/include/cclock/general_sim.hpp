#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cclock/delay.hpp"
#include "cclock/rng.hpp"
#include "cclock/stats.hpp"
#include "cclock/threshold.hpp"

namespace cclock::general {

/// Honest and adversarial heights under
///   H_t = max(H_{t-1}, omega_t (1 + H_{t - xi_t})),  A_t = A_{t-1} + 1 - omega_t,
/// with H_0 = 0, H_t = -1 for t < 0 and A_0 = -1. The full height history is kept
/// because a delay may reach arbitrarily far back.
///
/// Besides q = max(A - H, -1) it tracks the reflected queue
///   level_t = max(level_{t-1} + (1 - omega_t) - dH_t, -1),
/// whose length level + 1 is the M/G/1 queue with an unstoppable server.
class GrowthProcess {
 public:
  GrowthProcess() : h_{0} {}

  /// One step; `delay` is ignored for adversarial steps. Returns true on an honest increment.
  bool advance(bool honest, std::int64_t delay);

  std::int64_t time() const noexcept { return static_cast<std::int64_t>(h_.size()) - 1; }
  std::int64_t height() const noexcept { return h_.back(); }
  std::int64_t adversary() const noexcept { return a_; }
  std::int64_t q() const noexcept { return std::max<std::int64_t>(a_ - h_.back(), -1); }
  std::int64_t level() const noexcept { return level_; }
  std::int64_t queue_length() const noexcept { return level_ + 1; }

  /// H_t with the boundary convention for t < 0.
  std::int64_t height_at(std::int64_t t) const noexcept {
    return t < 0 ? -1 : h_[static_cast<std::size_t>(t)];
  }

 private:
  std::vector<std::int64_t> h_;
  std::int64_t a_ = -1;
  std::int64_t level_ = -1;
};

/// Per-step record for t = 1..horizon.
struct GrowthTrace {
  std::vector<std::uint8_t> honest;
  std::vector<std::int64_t> h;
  std::vector<std::int64_t> a;
  std::vector<std::int64_t> q;
  std::vector<std::int64_t> level;
  std::int64_t horizon = 0;
};

GrowthTrace simulate_heights(double p, const DelaySpec& delay, std::int64_t horizon, Rng& rng);

/// Deterministic driver: step t is honest iff honest[t-1], with delay delays[t-1].
GrowthTrace trace_from_steps(std::span<const std::uint8_t> honest,
                             std::span<const std::int64_t> delays);

struct CycleRecord {
  std::int64_t index = 0;      // 1-based
  std::int64_t x = 0;          // pseudo-service completions in the empty period
  std::int64_t y = 0;          // maximal queue length in the busy period
  std::int64_t empty_len = 0;  // steps
  std::int64_t busy_len = 0;   // steps
};

bool operator==(const CycleRecord& l, const CycleRecord& r);

/// Streaming cycle splitter. Starts inside an empty period whose first point
/// has already been seen; that point's increment is never counted in x.
class CycleAccumulator {
 public:
  std::optional<CycleRecord> push(std::int64_t length, bool increment);

 private:
  bool busy_ = false;
  std::int64_t x_ = 0;
  std::int64_t y_ = 0;
  std::int64_t empty_len_ = 1;
  std::int64_t busy_len_ = 0;
  std::int64_t completed_ = 0;
};

/// Cycles of the queue lengths (level + 1) of a trace, with t = 0 as the
/// first empty point; trailing incomplete cycles are dropped.
std::vector<CycleRecord> decompose_cycles(const GrowthTrace& trace);

/// Same on raw lengths; lengths[0] must be 0 and starts the first empty period.
std::vector<CycleRecord> decompose_lengths(std::span<const std::int64_t> lengths,
                                           std::span<const std::uint8_t> increments);

/// Runs the growth process and yields completed cycles one at a time.
class CycleSimulator {
 public:
  CycleSimulator(double p, DelaySpec delay, Rng& rng);
  CycleRecord next();
  std::int64_t steps() const noexcept { return process_.time(); }

 private:
  double p_;
  DelaySpec delay_;
  Rng& rng_;
  GrowthProcess process_;
  CycleAccumulator acc_;
};

std::vector<CycleRecord> simulate_cycles(double p, const DelaySpec& delay, std::size_t n_cycles,
                                         Rng& rng);

/// T = max{n : S_n - Y_n <= 0} with S_n = X_1 + ... + X_n; 0 if no cycle qualifies.
std::int64_t last_passage_index(std::span<const CycleRecord> cycles);

struct CycleStopRule {
  double eps = 1e-10;  // stop once z_*^S < eps
};

struct LastPassageResult {
  std::int64_t t_cycles = 0;    // last n with S_n - Y_n <= 0, or 0
  std::int64_t cycles_run = 0;
  std::int64_t s_final = 0;
  double stop_margin = 1.0;     // z_*^{s_final}
};

/// `cycles`, if given, receives every simulated cycle.
LastPassageResult last_passage_cycles(const ThresholdReport& report, Rng& rng,
                                      const CycleStopRule& stop = {},
                                      std::vector<CycleRecord>* cycles = nullptr);

struct LastPassageOptions {
  std::size_t n = 100'000;
  std::uint64_t master_seed = 0;
  CycleStopRule stop;
  unsigned jobs = 0;
  std::size_t bootstrap_resamples = 200;
  bool keep_cycles = false;
};

struct SurvivalRow {
  std::int64_t t;
  double survival;  // P(T >= t)
  std::size_t count;
};

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  std::size_t points = 0;
};

/// Unweighted LS of log P(T >= t) on t >= 1 with P <= max_survival and count >= min_count.
SlopeFit fit_cycle_tail(std::span<const SurvivalRow> table, double max_survival = 0.25,
                        std::size_t min_count = 100);

std::vector<SurvivalRow> cycle_survival(std::span<const std::int64_t> t_values);

struct LastPassageSummary {
  std::vector<std::int64_t> t_values;  // by replica
  std::vector<std::vector<CycleRecord>> cycles;  // by replica, if kept
  std::vector<SurvivalRow> survival;
  double gamma_analytic = 0.0;
  SlopeFit fit;
  stats::Interval slope_ci{0.0, 0.0};
};

LastPassageSummary ensemble_last_passage(const ThresholdReport& report,
                                         const LastPassageOptions& opt);

struct CycleDiagnostics {
  std::size_t n = 0;
  double x_mean = 0.0;
  double x_mean_std_error = 0.0;
  double x_mean_expected = 0.0;
  stats::ChiSquareResult x_chi_square;
  double x_transform = 0.0;           // mean z_*^X
  double x_transform_expected = 0.0;  // (1-j0)/(1-j0 z_*)
  double py_slope = 0.0;              // LS slope of log P(Y >= y), y in [2, 10] with >= 10 counts
  double py_slope_expected = 0.0;     // log z_*
  double xy_correlation = 0.0;
};

CycleDiagnostics cycle_statistics(std::span<const CycleRecord> cycles,
                                  const ThresholdReport& report);

/// One honest renewal interval R and the adversarial steps J inside it,
/// drawn from omega and xi exactly as the growth process does.
struct ServiceSample {
  std::int64_t r;
  std::int64_t j;
};
ServiceSample sample_service(double p, const DelaySpec& delay, Rng& rng);

/// Inter-increment gaps of H in a run of the growth process.
std::vector<std::int64_t> renewal_gaps(double p, const DelaySpec& delay, std::size_t n_gaps,
                                       Rng& rng);

/// Optional stopping of z_*^{-Q} on the service-embedded queue, started at
/// length 1 and absorbed in {0} or [absorb_high, inf).
struct MartingaleCheck {
  double mean;
  double std_error;
  double expected;  // z_*^{-1}
};
MartingaleCheck optional_stopping(const ThresholdReport& report, std::size_t n_fragments,
                                  std::int64_t absorb_high, Rng& rng);

}  // namespace cclock::general
