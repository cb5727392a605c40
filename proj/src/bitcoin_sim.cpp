#include "cclock/bitcoin_sim.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cclock/errors.hpp"
#include "cclock/parallel.hpp"

namespace cclock::bitcoin {

namespace {

constexpr std::int64_t kMaxEvents = 2'000'000'000;

}  // namespace

const char* to_string(StopRule::Kind kind) {
  return kind == StopRule::Kind::paper_proxy ? "paper_proxy" : "lead_cap";
}

std::int64_t draw_initial_lead(const BitcoinParams& bp, StartState start, Rng& rng) {
  if (start == StartState::tie) return 0;
  return rng.geometric0(bp.rho) - 1;
}

StylizedTrace simulate_replica(const BitcoinParams& bp, Rng& rng, const StopRule& stop,
                               std::int64_t initial_w, bool record_path) {
  const double up = bp.lambda / (bp.lambda + bp.mu);
  const double rate = bp.lambda + bp.mu;
  // Smallest lead d with rho^d < eps; rho = 0 means any lead is final.
  std::int64_t safe_lead = 1;
  if (stop.kind == StopRule::Kind::lead_cap && bp.rho > 0.0) {
    safe_lead = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::floor(std::log(stop.lead_eps) / std::log(bp.rho))) + 1);
  }

  StylizedTrace trace;
  trace.stopped_by = stop.kind;
  std::int64_t w = initial_w;
  double t = 0.0;
  std::int64_t quiet = 0;  // consecutive events with H > A since the last violation

  auto done = [&] {
    if (w >= 0) return false;
    if (stop.kind == StopRule::Kind::paper_proxy) return quiet >= stop.proxy_blocks;
    return -w >= safe_lead;
  };

  while (!done()) {
    if (trace.events >= kMaxEvents) throw InternalError("stylized replica exceeded the event cap");
    t += rng.exponential(rate);
    const std::int64_t before = w;
    w += rng.uniform() < up ? 1 : -1;
    ++trace.events;
    if (w >= 0) {
      quiet = 0;
    } else {
      ++quiet;
      if (before == 0) trace.tau_c = t;
    }
    if (record_path) {
      trace.event_times.push_back(t);
      trace.q_path.push_back(std::max<std::int64_t>(w, -1));
    }
  }
  return trace;
}

StylizedTrace simulate_replica(const BitcoinParams& bp, Rng& rng, const StopRule& stop,
                               StartState start, bool record_path) {
  const std::int64_t w0 = draw_initial_lead(bp, start, rng);
  return simulate_replica(bp, rng, stop, w0, record_path);
}

EnsembleSummary run_ensemble(const BitcoinParams& bp, const EnsembleOptions& opt) {
  if (opt.n == 0) throw DomainError("ensemble size must be at least 1");
  EnsembleSummary summary;
  summary.n = opt.n;
  summary.threshold_min = opt.threshold_min;
  summary.master_seed = opt.master_seed;
  summary.samples = parallel_map<double>(opt.n, opt.jobs, [&](std::size_t i) {
    Rng rng = replica_stream(opt.master_seed, i);
    return simulate_replica(bp, rng, opt.stop, opt.start).tau_c;
  });
  const auto est = stats::mean_estimate(summary.samples);
  summary.mean_ttc = est.mean;
  summary.std_error = est.std_error;
  std::size_t exceed = 0;
  for (double x : summary.samples) exceed += x > opt.threshold_min ? 1 : 0;
  summary.exceed_frac = static_cast<double>(exceed) / static_cast<double>(opt.n);
  summary.ecdf = summary.samples;
  std::sort(summary.ecdf.begin(), summary.ecdf.end());
  return summary;
}

std::vector<TailPoint> empirical_tail(const EnsembleSummary& summary, std::span<const double> grid,
                                      std::size_t min_count) {
  if (summary.ecdf.empty()) throw DomainError("empirical_tail: empty summary");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw DomainError("empirical_tail: grid must be increasing");
  }
  std::vector<TailPoint> out;
  for (const auto& pt : stats::survival_strict(summary.ecdf, grid)) {
    if (pt.count < min_count || pt.count == 0) continue;
    out.push_back({pt.t, std::log(pt.survival), pt.count});
  }
  return out;
}

std::vector<double> default_tail_grid(const EnsembleSummary& summary, std::size_t points) {
  if (summary.ecdf.empty()) throw DomainError("default_tail_grid: empty summary");
  const double top = summary.ecdf.back();
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = points > 1 ? top * static_cast<double>(i) / static_cast<double>(points - 1) : 0.0;
  }
  return grid;
}

TailSlope fit_tail_exponent(const EnsembleSummary& summary, std::size_t grid_points,
                            double max_survival, std::size_t min_count) {
  const auto grid = default_tail_grid(summary, grid_points);
  std::vector<std::vector<double>> rows;
  std::vector<double> y, w;
  for (const auto& pt : empirical_tail(summary, grid, min_count)) {
    if (pt.t <= 0.0 || std::exp(pt.log_survival) > max_survival) continue;
    rows.push_back({1.0, -pt.t, -1.0 / pt.t});
    y.push_back(pt.log_survival + 0.5 * std::log(pt.t));
    w.push_back(static_cast<double>(pt.count));
  }
  if (rows.size() < 4) throw DomainError("fit_tail_exponent: too few tail points");
  const auto fit = stats::least_squares(rows, y, w);
  return {fit.coef[1], fit.std_error[1], rows.size()};
}

BusyPeriodEstimate busy_period_oracle(const BitcoinParams& bp, std::size_t n_periods,
                                      std::span<const double> s_values, Rng& rng) {
  for (double s : s_values) {
    if (s < 0.0) throw DomainError("busy_period_oracle: s must be non-negative");
  }
  const double up = bp.lambda / (bp.lambda + bp.mu);
  const double rate = bp.lambda + bp.mu;
  std::vector<double> lengths(n_periods);
  for (auto& len : lengths) {
    std::int64_t w = 0;
    double t = 0.0;
    while (w >= 0) {
      t += rng.exponential(rate);
      w += rng.uniform() < up ? 1 : -1;
    }
    len = t;
  }
  BusyPeriodEstimate est;
  const auto m = stats::mean_estimate(lengths);
  est.mean_length = m.mean;
  est.mean_length_std_error = m.std_error;
  std::vector<double> transformed(n_periods);
  for (double s : s_values) {
    for (std::size_t i = 0; i < n_periods; ++i) transformed[i] = std::exp(-s * lengths[i]);
    const auto e = stats::mean_estimate(transformed);
    est.laplace.push_back(e.mean);
    est.laplace_std_error.push_back(e.std_error);
  }
  return est;
}

std::int64_t reflected_queue_after(const BitcoinParams& bp, std::int64_t q0, std::int64_t events,
                                   Rng& rng) {
  const double up = bp.lambda / (bp.lambda + bp.mu);
  std::int64_t q = q0;
  for (std::int64_t k = 0; k < events; ++k) {
    q = rng.uniform() < up ? q + 1 : std::max<std::int64_t>(q - 1, -1);
  }
  return q;
}

}  // namespace cclock::bitcoin
