#include "cclock/io.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cclock/errors.hpp"

namespace cclock::io {

std::string format_real(double x) { return fmt::format("{}", x); }

Json real_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

void write_samples_csv(std::ostream& os, const bitcoin::EnsembleSummary& s) {
  os << "replica,tau_c_minutes\n";
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    os << i << ',' << format_real(s.samples[i]) << '\n';
  }
}

void write_tail_csv(std::ostream& os, std::span<const bitcoin::TailPoint> tail) {
  os << "t_minutes,log_survival\n";
  for (const auto& pt : tail) os << format_real(pt.t) << ',' << format_real(pt.log_survival) << '\n';
}

Json bitcoin_summary_json(const BitcoinParams& bp, const bitcoin::EnsembleSummary& s) {
  return Json{{"p", real_or_null(bp.p)},
              {"q", real_or_null(bp.q)},
              {"rate_scale", bp.rate_scale},
              {"n", s.n},
              {"mean", s.mean_ttc},
              {"stderr", s.std_error},
              {"exceed_frac", s.exceed_frac},
              {"threshold_min", s.threshold_min},
              {"master_seed", s.master_seed}};
}

void write_t_cycles_csv(std::ostream& os, std::span<const std::int64_t> t_values) {
  os << "replica,t_cycles\n";
  for (std::size_t i = 0; i < t_values.size(); ++i) os << i << ',' << t_values[i] << '\n';
}

void write_cycles_csv(std::ostream& os, const general::LastPassageSummary& s) {
  os << "replica,cycle,x,y,empty_len,busy_len\n";
  for (std::size_t i = 0; i < s.cycles.size(); ++i) {
    for (const auto& c : s.cycles[i]) {
      os << i << ',' << c.index << ',' << c.x << ',' << c.y << ',' << c.empty_len << ','
         << c.busy_len << '\n';
    }
  }
}

Json general_summary_json(const ThresholdReport& report, const general::LastPassageSummary& s,
                          std::size_t n, std::uint64_t master_seed) {
  return Json{{"p", report.p},
              {"delay", report.delay.label()},
              {"n", n},
              {"gamma_analytic", report.gamma},
              {"slope_fitted", real_or_null(s.fit.slope)},
              {"slope_ci", Json::array({real_or_null(s.slope_ci.lo), real_or_null(s.slope_ci.hi)})},
              {"master_seed", master_seed}};
}

Json threshold_json(const ThresholdReport& r) {
  return Json{{"p", r.p},
              {"delay", r.delay.label()},
              {"p_c", r.p_c},
              {"z_star", r.z_star},
              {"j0", r.j0},
              {"gamma", r.gamma},
              {"solver_iters", r.solver_iters},
              {"residuals",
               Json{{"p_c", r.p_c_residual},
                    {"z_star", r.z_star_residual},
                    {"transform", r.transform_residual}}}};
}

Json analytic_json(const BitcoinParams& bp, StartState start) {
  Json j{{"p", real_or_null(bp.p)},
         {"q", real_or_null(bp.q)},
         {"rate_scale", bp.rate_scale},
         {"start", to_string(start)},
         {"lambda", bp.lambda},
         {"mu", bp.mu},
         {"rho", bp.rho},
         {"p_hat", bp.p_hat},
         {"theta", bp.theta},
         {"s_star", bp.s_star},
         {"tail_exponent", mm1::tail_exponent(bp)},
         {"mean_ttc", mm1::ttc_mean(bp, start)},
         {"mean_ttc_closed_form", mm1::ttc_mean_closed_form(bp, start)}};
  // The published pole and mean are reported for comparison only.
  if (bp.theta > 0.0 && bp.theta < 0.5) {
    j["s_star_star"] = mm1::dominant_pole(bp).s_star_star;
    j["mean_ttc_published"] = mm1::displayed_ttc_mean(bp);
  } else {
    j["s_star_star"] = nullptr;
    j["mean_ttc_published"] = nullptr;
  }
  return j;
}

void write_transform_csv(std::ostream& os, const BitcoinParams& bp, StartState start, int points) {
  if (points < 2) throw InputError("transform grid needs at least 2 points", "grid_points");
  os << "s,tau_lt\n";
  // Log-spaced on [1e-3, 10] x rate_scale.
  for (int k = 0; k < points; ++k) {
    const double s = bp.rate_scale * std::pow(10.0, -3.0 + 4.0 * k / (points - 1));
    os << format_real(s) << ',' << format_real(mm1::ttc_lt(bp, s, start)) << '\n';
  }
}

}  // namespace cclock::io
