#include "cclock/general_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "cclock/errors.hpp"
#include "cclock/parallel.hpp"

namespace cclock::general {

bool GrowthProcess::advance(bool honest, std::int64_t delay) {
  const std::int64_t t = time() + 1;
  const std::int64_t prev = h_.back();
  std::int64_t next = prev;
  if (honest) next = std::max(prev, 1 + height_at(t - delay));
  h_.push_back(next);
  const bool increment = next > prev;
  if (!honest) ++a_;
  level_ = std::max<std::int64_t>(level_ + (honest ? 0 : 1) - (increment ? 1 : 0), -1);
  return increment;
}

namespace {

void record(GrowthTrace& trace, const GrowthProcess& proc, bool honest) {
  trace.honest.push_back(honest ? 1 : 0);
  trace.h.push_back(proc.height());
  trace.a.push_back(proc.adversary());
  trace.q.push_back(proc.q());
  trace.level.push_back(proc.level());
  ++trace.horizon;
}

}  // namespace

GrowthTrace simulate_heights(double p, const DelaySpec& delay, std::int64_t horizon, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(fmt::format("p = {} outside [0, 1]", p));
  if (horizon < 1) throw DomainError("horizon must be at least 1");
  GrowthProcess proc;
  GrowthTrace trace;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const bool honest = rng.bernoulli(p);
    const std::int64_t xi = honest ? delay.sample(rng) : 0;
    proc.advance(honest, xi);
    record(trace, proc, honest);
  }
  return trace;
}

GrowthTrace trace_from_steps(std::span<const std::uint8_t> honest,
                             std::span<const std::int64_t> delays) {
  if (honest.size() != delays.size()) throw DomainError("trace_from_steps: size mismatch");
  GrowthProcess proc;
  GrowthTrace trace;
  for (std::size_t k = 0; k < honest.size(); ++k) {
    proc.advance(honest[k] != 0, delays[k]);
    record(trace, proc, honest[k] != 0);
  }
  return trace;
}

bool operator==(const CycleRecord& l, const CycleRecord& r) {
  return l.index == r.index && l.x == r.x && l.y == r.y && l.empty_len == r.empty_len &&
         l.busy_len == r.busy_len;
}

std::optional<CycleRecord> CycleAccumulator::push(std::int64_t length, bool increment) {
  if (!busy_) {
    if (length == 0) {
      ++empty_len_;
      if (increment) ++x_;
    } else {
      busy_ = true;
      busy_len_ = 1;
      y_ = length;
    }
    return std::nullopt;
  }
  if (length > 0) {
    ++busy_len_;
    y_ = std::max(y_, length);
    return std::nullopt;
  }
  CycleRecord rec{++completed_, x_, y_, empty_len_, busy_len_};
  busy_ = false;
  x_ = 0;
  y_ = 0;
  empty_len_ = 1;
  busy_len_ = 0;
  return rec;
}

std::vector<CycleRecord> decompose_lengths(std::span<const std::int64_t> lengths,
                                           std::span<const std::uint8_t> increments) {
  if (lengths.size() != increments.size()) throw DomainError("decompose_lengths: size mismatch");
  if (lengths.empty()) return {};
  if (lengths[0] != 0) throw DomainError("decompose_lengths: must start in an empty period");
  std::vector<CycleRecord> out;
  CycleAccumulator acc;
  for (std::size_t k = 1; k < lengths.size(); ++k) {
    if (auto rec = acc.push(lengths[k], increments[k] != 0)) out.push_back(*rec);
  }
  return out;
}

std::vector<CycleRecord> decompose_cycles(const GrowthTrace& trace) {
  const auto n = static_cast<std::size_t>(trace.horizon);
  std::vector<std::int64_t> lengths(n + 1, 0);
  std::vector<std::uint8_t> increments(n + 1, 0);
  std::int64_t prev_h = 0;
  for (std::size_t k = 0; k < n; ++k) {
    lengths[k + 1] = trace.level[k] + 1;
    increments[k + 1] = trace.h[k] > prev_h ? 1 : 0;
    prev_h = trace.h[k];
  }
  return decompose_lengths(lengths, increments);
}

CycleSimulator::CycleSimulator(double p, DelaySpec delay, Rng& rng)
    : p_(p), delay_(std::move(delay)), rng_(rng) {}

CycleRecord CycleSimulator::next() {
  constexpr std::int64_t kMaxSteps = 1'000'000'000;
  for (;;) {
    if (process_.time() >= kMaxSteps) throw InternalError("cycle simulation exceeded step cap");
    const bool honest = rng_.bernoulli(p_);
    const std::int64_t xi = honest ? delay_.sample(rng_) : 0;
    const bool inc = process_.advance(honest, xi);
    if (auto rec = acc_.push(process_.queue_length(), inc)) return *rec;
  }
}

std::vector<CycleRecord> simulate_cycles(double p, const DelaySpec& delay, std::size_t n_cycles,
                                         Rng& rng) {
  CycleSimulator sim(p, delay, rng);
  std::vector<CycleRecord> out;
  out.reserve(n_cycles);
  for (std::size_t k = 0; k < n_cycles; ++k) out.push_back(sim.next());
  return out;
}

std::int64_t last_passage_index(std::span<const CycleRecord> cycles) {
  std::int64_t s = 0;
  std::int64_t t = 0;
  for (std::size_t n = 0; n < cycles.size(); ++n) {
    s += cycles[n].x;
    if (s - cycles[n].y <= 0) t = static_cast<std::int64_t>(n) + 1;
  }
  return t;
}

LastPassageResult last_passage_cycles(const ThresholdReport& report, Rng& rng,
                                      const CycleStopRule& stop,
                                      std::vector<CycleRecord>* cycles) {
  if (!(report.p > report.p_c)) {
    throw PreconditionError(fmt::format("p = {} is not above the security threshold p_c = {:.9f}",
                                        report.p, report.p_c),
                            report.p_c);
  }
  if (!(report.z_star > 0.0 && report.z_star < 1.0)) {
    throw DomainError(fmt::format("stop rule needs z_* in (0, 1), got {}", report.z_star));
  }
  CycleSimulator sim(report.p, report.delay, rng);
  const double log_z = std::log(report.z_star);
  const double log_eps = std::log(stop.eps);
  LastPassageResult res;
  for (;;) {
    const CycleRecord rec = sim.next();
    if (cycles) cycles->push_back(rec);
    ++res.cycles_run;
    res.s_final += rec.x;
    if (res.s_final - rec.y <= 0) res.t_cycles = res.cycles_run;
    if (static_cast<double>(res.s_final) * log_z < log_eps) break;
  }
  res.stop_margin = std::exp(static_cast<double>(res.s_final) * log_z);
  return res;
}

std::vector<SurvivalRow> cycle_survival(std::span<const std::int64_t> t_values) {
  if (t_values.empty()) return {};
  const std::int64_t top = *std::max_element(t_values.begin(), t_values.end());
  std::vector<std::size_t> hist(static_cast<std::size_t>(top) + 1, 0);
  for (auto t : t_values) ++hist[static_cast<std::size_t>(t)];
  std::vector<SurvivalRow> out(hist.size());
  std::size_t at_least = 0;
  const double n = static_cast<double>(t_values.size());
  for (std::size_t t = hist.size(); t-- > 0;) {
    at_least += hist[t];
    out[t] = {static_cast<std::int64_t>(t), static_cast<double>(at_least) / n, at_least};
  }
  return out;
}

SlopeFit fit_cycle_tail(std::span<const SurvivalRow> table, double max_survival,
                        std::size_t min_count) {
  std::vector<double> x, y;
  for (const auto& row : table) {
    if (row.t < 1 || row.survival > max_survival || row.count < min_count) continue;
    x.push_back(static_cast<double>(row.t));
    y.push_back(std::log(row.survival));
  }
  if (x.size() < 2) throw DomainError("fit_cycle_tail: fewer than two points in the fit window");
  const auto fit = stats::fit_line(x, y);
  return {fit.slope, fit.slope_std_error, x.size()};
}

LastPassageSummary ensemble_last_passage(const ThresholdReport& report,
                                         const LastPassageOptions& opt) {
  if (opt.n == 0) throw DomainError("ensemble size must be at least 1");
  struct Replica {
    std::int64_t t = 0;
    std::vector<CycleRecord> cycles;
  };
  auto replicas = parallel_map<Replica>(opt.n, opt.jobs, [&](std::size_t i) {
    Rng rng = replica_stream(opt.master_seed, i);
    Replica out;
    out.t = last_passage_cycles(report, rng, opt.stop, opt.keep_cycles ? &out.cycles : nullptr)
                .t_cycles;
    return out;
  });

  LastPassageSummary summary;
  summary.gamma_analytic = report.gamma;
  summary.t_values.reserve(opt.n);
  for (auto& r : replicas) {
    summary.t_values.push_back(r.t);
    if (opt.keep_cycles) summary.cycles.push_back(std::move(r.cycles));
  }
  summary.survival = cycle_survival(summary.t_values);
  try {
    summary.fit = fit_cycle_tail(summary.survival);
  } catch (const DomainError&) {
    // Too few replicas for a fit window; slope reported as NaN.
    summary.fit = {NAN, NAN, 0};
  }
  if (opt.bootstrap_resamples > 0 && std::isfinite(summary.fit.slope)) {
    std::vector<std::int64_t> resampled(opt.n);
    summary.slope_ci = stats::bootstrap_interval(
        opt.n, opt.bootstrap_resamples, opt.master_seed ^ 0xb007ULL, 0.95,
        [&](const std::vector<std::size_t>& idx) {
          for (std::size_t k = 0; k < idx.size(); ++k) resampled[k] = summary.t_values[idx[k]];
          try {
            return fit_cycle_tail(cycle_survival(resampled)).slope;
          } catch (const DomainError&) {
            return static_cast<double>(NAN);
          }
        });
  } else {
    summary.slope_ci = {NAN, NAN};
  }
  return summary;
}

CycleDiagnostics cycle_statistics(std::span<const CycleRecord> cycles,
                                  const ThresholdReport& report) {
  constexpr std::size_t kMinCycles = 10'000;
  constexpr std::size_t kMinTailCount = 10;
  if (cycles.size() < kMinCycles) {
    throw DomainError(fmt::format("cycle_statistics needs at least {} cycles, got {}", kMinCycles,
                                  cycles.size()));
  }
  const double j0 = report.j0;
  const double z = report.z_star;
  CycleDiagnostics d;
  d.n = cycles.size();

  std::vector<double> xs, ys, zx;
  xs.reserve(d.n);
  ys.reserve(d.n);
  zx.reserve(d.n);
  std::int64_t x_max = 0, y_max = 0;
  for (const auto& c : cycles) {
    xs.push_back(static_cast<double>(c.x));
    ys.push_back(static_cast<double>(c.y));
    zx.push_back(std::pow(z, static_cast<double>(c.x)));
    x_max = std::max(x_max, c.x);
    y_max = std::max(y_max, c.y);
  }
  const auto xm = stats::mean_estimate(xs);
  d.x_mean = xm.mean;
  d.x_mean_std_error = xm.std_error;
  d.x_mean_expected = j0 / (1.0 - j0);

  std::vector<std::uint64_t> x_hist(static_cast<std::size_t>(x_max) + 1, 0);
  for (const auto& c : cycles) ++x_hist[static_cast<std::size_t>(c.x)];
  std::vector<double> x_probs(x_hist.size());
  for (std::size_t k = 0; k < x_probs.size(); ++k) {
    x_probs[k] = (1.0 - j0) * std::pow(j0, static_cast<double>(k));
  }
  d.x_chi_square = stats::chi_square_gof(x_hist, x_probs);

  d.x_transform = stats::mean_estimate(zx).mean;
  d.x_transform_expected = (1.0 - j0) / (1.0 - j0 * z);

  std::vector<std::size_t> y_at_least(static_cast<std::size_t>(y_max) + 2, 0);
  for (const auto& c : cycles) ++y_at_least[static_cast<std::size_t>(c.y)];
  for (std::size_t k = y_at_least.size() - 1; k-- > 0;) y_at_least[k] += y_at_least[k + 1];
  std::vector<double> yy, log_p;
  for (std::int64_t y = 2; y <= 10 && y < static_cast<std::int64_t>(y_at_least.size()); ++y) {
    const auto count = y_at_least[static_cast<std::size_t>(y)];
    if (count < kMinTailCount) continue;
    yy.push_back(static_cast<double>(y));
    log_p.push_back(std::log(static_cast<double>(count) / static_cast<double>(d.n)));
  }
  d.py_slope = yy.size() >= 2 ? stats::fit_line(yy, log_p).slope : NAN;
  d.py_slope_expected = std::log(z);
  d.xy_correlation = stats::pearson(xs, ys);
  return d;
}

ServiceSample sample_service(double p, const DelaySpec& delay, Rng& rng) {
  std::int64_t j = 0;
  for (std::int64_t i = 1;; ++i) {
    if (rng.bernoulli(p)) {
      // The honest block extends the current height iff its reference is not older than the last renewal.
      if (delay.sample(rng) <= i) return {i, j};
    } else {
      ++j;
    }
  }
}

std::vector<std::int64_t> renewal_gaps(double p, const DelaySpec& delay, std::size_t n_gaps,
                                       Rng& rng) {
  GrowthProcess proc;
  std::vector<std::int64_t> gaps;
  gaps.reserve(n_gaps);
  std::int64_t last = 0;
  while (gaps.size() < n_gaps) {
    const bool honest = rng.bernoulli(p);
    const std::int64_t xi = honest ? delay.sample(rng) : 0;
    if (proc.advance(honest, xi)) {
      gaps.push_back(proc.time() - last);
      last = proc.time();
    }
  }
  return gaps;
}

MartingaleCheck optional_stopping(const ThresholdReport& report, std::size_t n_fragments,
                                  std::int64_t absorb_high, Rng& rng) {
  const double inv_z = 1.0 / report.z_star;
  std::vector<double> values(n_fragments);
  for (auto& v : values) {
    std::int64_t q = 1;
    while (q > 0 && q < absorb_high) q += sample_service(report.p, report.delay, rng).j - 1;
    v = std::pow(inv_z, static_cast<double>(q));
  }
  const auto est = stats::mean_estimate(values);
  return {est.mean, est.std_error, inv_z};
}

}  // namespace cclock::general
