#include "cclock/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "cclock/bitcoin_sim.hpp"
#include "cclock/general_sim.hpp"
#include "cclock/io.hpp"
#include "cclock/mm1.hpp"
#include "cclock/renewal.hpp"
#include "cclock/threshold.hpp"

namespace cclock::validation {

namespace {

constexpr double kQ = 0.9;
constexpr double kRate = 0.1;

Check make(std::string id, std::string group, std::string target, double observed,
           std::string tolerance, bool pass, std::string detail = {}) {
  return {std::move(id), std::move(group), std::move(target), observed,
          std::move(tolerance), pass, std::move(detail)};
}

double scale(const Options& opt) { return opt.quick ? 2.0 : 1.0; }

std::size_t pick(const Options& opt, std::size_t full, std::size_t quick) {
  return opt.quick ? quick : full;
}

double rel_err(double observed, double target) {
  return std::abs(observed - target) / std::abs(target);
}

}  // namespace

std::vector<Check> analytic_identities(const Options&) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Check> out;
  const std::string g = "analytic";

  {
    const auto bp = BitcoinParams::from_protocol(0.72, kQ, kRate);
    const double values[] = {mm1::ttc_lt(bp, 0.0, StartState::tie),
                             mm1::ttc_lt(bp, 0.0, StartState::stationary),
                             mm1::displayed_ttc_lt(bp, 0.0),
                             mm1::busy_lt(bp, 0.0),
                             mm1::cycle_lt(bp, 0.0),
                             mm1::residual_lt(bp, 0.0),
                             mm1::unstable_cycle_lt(bp, 0.0),
                             mm1::kappa_lt(bp, 0.0)};
    double worst = 0.0;
    for (double v : values) worst = std::max(worst, std::abs(v - 1.0));
    out.push_back(make("transforms-at-zero", g, "tau*(0)=Phi(0)=Psi(0)=Gamma(0)=kappa(0)=1",
                       worst, "1e-12", worst <= 1e-12));
  }

  {
    Rng rng(0xb5ULL);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double q = 0.3 + 0.7 * rng.uniform_positive();
      const double p_min = 1.0 / (1.0 + q);
      const double p = p_min + (0.995 - p_min) * (0.01 + 0.99 * rng.uniform());
      const auto bp = BitcoinParams::from_protocol(p, q, kRate);
      worst = std::max(worst, std::abs(mm1::busy_lt(bp, -bp.s_star) - 1.0 / std::sqrt(bp.rho)));
    }
    out.push_back(make("busy-branch-point", g, "B(-s_*) = rho^-1/2 (20 random p,q)", worst, "1e-9",
                       worst <= 1e-9));
  }

  {
    double worst = 0.0;
    bool signs = true;
    for (int k = 72; k <= 99; ++k) {
      const auto bp = BitcoinParams::from_protocol(k / 100.0, kQ, kRate);
      const auto pole = mm1::dominant_pole(bp);
      worst = std::max(worst, std::abs(mm1::displayed_denominator(bp, -pole.s_star_star)));
      signs = signs && mm1::pole_function(bp.theta, 0.0) > 0.0 &&
              mm1::pole_function(bp.theta, std::sqrt(2.0 * bp.theta) - 1.0) < 0.0;
    }
    out.push_back(make("pole-identity", g, "D(-s_**) = 0, g(0) > 0, g(sqrt(2 theta)-1) < 0",
                       worst, "1e-9", worst <= 1e-9 && signs,
                       signs ? "" : "g endpoint sign check failed"));
  }

  {
    const double pc = p_critical(DelaySpec::unit()).value;
    out.push_back(make("p-critical-unit", g, "0.5", pc, "1e-9", std::abs(pc - 0.5) <= 1e-9));
    const double pc2 = p_critical(DelaySpec::deterministic(2)).value;
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    out.push_back(make("p-critical-det2", g, fmt::format("{:.9f}", golden), pc2, "1e-6",
                       std::abs(pc2 - golden) <= 1e-6));
    const double z = z_star(0.8, DelaySpec::deterministic(2)).value;
    out.push_back(make("z-star-det2", g, "0.3125", z, "1e-9", std::abs(z - 0.3125) <= 1e-9));
    const double gm = gamma_rate(0.8, DelaySpec::deterministic(2));
    out.push_back(make("gamma-det2", g, "0.45", gm, "1e-8", std::abs(gm - 0.45) <= 1e-8));
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.push_back(make("analytic-runtime", g, "< 1 s", secs, "1 s", secs < 1.0));
  return out;
}

std::vector<Check> paper_numbers(const Options& opt) {
  std::vector<Check> out;
  const std::string g = "paper";
  const double k = scale(opt);
  const std::size_t n = pick(opt, 25'000, 5'000);

  auto ensemble = [&](double p, std::uint64_t salt) {
    bitcoin::EnsembleOptions eo;
    eo.n = n;
    eo.master_seed = opt.master_seed + salt;
    eo.jobs = opt.jobs;
    return bitcoin::run_ensemble(BitcoinParams::from_protocol(p, kQ, kRate), eo);
  };

  const auto bp72 = BitcoinParams::from_protocol(0.72, kQ, kRate);
  const double mean72 = mm1::ttc_mean(bp72);
  const double half = 6.0 * k;
  out.push_back(make("ttc-mean-analytic", g, fmt::format("[{}, {}] min", 60 - half, 60 + half),
                     mean72, fmt::format("+-{}", half), std::abs(mean72 - 60.0) <= half));

  const auto s72 = ensemble(0.72, 72);
  const double z = std::abs(s72.mean_ttc - mean72) / s72.std_error;
  out.push_back(make("ttc-mean-sim", g, fmt::format("{:.3f} min", mean72), s72.mean_ttc,
                     fmt::format("{} SE", 3 * k), z <= 3.0 * k,
                     fmt::format("n={}, SE={:.3f}, |z|={:.2f}", n, s72.std_error, z)));

  const auto s84 = ensemble(0.84, 84);
  const auto s89 = ensemble(0.89, 89);
  {
    const double lo = 0.10 - 0.02 * k, hi = 0.10 + 0.02 * k;
    out.push_back(make("exceed-60min-p0.84", g, fmt::format("[{:.3f}, {:.3f}]", lo, hi),
                       s84.exceed_frac, fmt::format("+-{:.3f}", 0.02 * k),
                       s84.exceed_frac >= lo && s84.exceed_frac <= hi));
  }
  {
    const double lo = 0.05 - 0.015 * k, hi = 0.05 + 0.015 * k;
    out.push_back(make("exceed-60min-p0.89", g, fmt::format("[{:.3f}, {:.3f}]", lo, hi),
                       s89.exceed_frac, fmt::format("+-{:.3f}", 0.015 * k),
                       s89.exceed_frac >= lo && s89.exceed_frac <= hi));
  }

  const std::pair<double, const bitcoin::EnsembleSummary*> tails[] = {
      {0.72, &s72}, {0.84, &s84}, {0.89, &s89}};
  for (const auto& [p, summary] : tails) {
    const auto bp = BitcoinParams::from_protocol(p, kQ, kRate);
    const double expected = mm1::tail_exponent(bp);
    const double pole = mm1::dominant_pole(bp).s_star_star;
    const auto fit = bitcoin::fit_tail_exponent(*summary);
    const double err = rel_err(fit.exponent, expected);
    out.push_back(make(fmt::format("tail-slope-p{:.2f}", p), g,
                       fmt::format("-{:.5f} /min", expected), -fit.exponent,
                       fmt::format("{:.0f}%", 10 * k), err <= 0.10 * k,
                       fmt::format("rel err {:.3f}; branch point s_*", err)));
    // The same fit against the pole of the published transform.
    const double err_pole = rel_err(fit.exponent, pole);
    out.push_back(make(fmt::format("tail-slope-pole-p{:.2f}", p), g,
                       fmt::format("-{:.5f} /min", pole), -fit.exponent,
                       fmt::format("{:.0f}%", 10 * k), err_pole <= 0.10 * k,
                       fmt::format("rel err {:.3f}; published s_**", err_pole)));
  }
  return out;
}

std::vector<Check> general_suite(const Options& opt) {
  std::vector<Check> out;
  const std::string g = "general";
  const double k = scale(opt);
  const std::size_t n_rep = pick(opt, 100'000, 20'000);
  const std::size_t n_cyc = pick(opt, 100'000, 20'000);
  const std::size_t n_frag = pick(opt, 100'000, 20'000);

  struct Config {
    double p;
    DelaySpec delay;
    std::uint64_t salt;
  };
  const Config configs[] = {{0.7, DelaySpec::unit(), 700}, {0.8, DelaySpec::deterministic(2), 800}};

  for (const auto& cfg : configs) {
    ThresholdReport report = solve_thresholds(cfg.p, cfg.delay);
    report.z_star *= opt.z_star_factor;
    report.gamma = gamma_from(report.j0, report.z_star);
    const std::string tag = fmt::format("[p={},{}]", cfg.p, cfg.delay.label());

    general::LastPassageOptions lo;
    lo.n = n_rep;
    lo.master_seed = opt.master_seed + cfg.salt;
    lo.jobs = opt.jobs;
    lo.bootstrap_resamples = 0;
    const auto lp = general::ensemble_last_passage(report, lo);
    const double log_gamma = std::log(report.gamma);
    const double err = rel_err(lp.fit.slope, log_gamma);
    out.push_back(make("gamma-slope" + tag, g, fmt::format("log gamma = {:.5f}", log_gamma),
                       lp.fit.slope, fmt::format("{:.0f}%", 10 * k),
                       std::isfinite(err) && err <= 0.10 * k,
                       fmt::format("rel err {:.3f}, {} fit points", err, lp.fit.points)));

    Rng rng = replica_stream(opt.master_seed + cfg.salt, 1'000'000'007ULL);
    const auto cycles = general::simulate_cycles(cfg.p, cfg.delay, n_cyc, rng);
    const auto d = general::cycle_statistics(cycles, report);
    const double alpha = opt.quick ? 0.005 : 0.01;
    out.push_back(make("x-geometric" + tag, g, fmt::format("chi2 p-value >= {}", alpha),
                       d.x_chi_square.p_value, fmt::format("alpha {}", alpha),
                       d.x_chi_square.p_value >= alpha,
                       fmt::format("chi2={:.2f}, dof={}", d.x_chi_square.statistic,
                                   d.x_chi_square.dof)));
    const double xt_err = rel_err(d.x_transform, d.x_transform_expected);
    out.push_back(make("x-transform" + tag, g, fmt::format("{:.6f}", d.x_transform_expected),
                       d.x_transform, fmt::format("{:.0f}%", 1 * k), xt_err <= 0.01 * k));
    const double py_err = rel_err(d.py_slope, d.py_slope_expected);
    out.push_back(make("py-slope" + tag, g, fmt::format("log z_* = {:.5f}", d.py_slope_expected),
                       d.py_slope, fmt::format("{:.0f}%", 10 * k),
                       std::isfinite(py_err) && py_err <= 0.10 * k));
    const double corr_bound = 4.0 * k / std::sqrt(static_cast<double>(d.n));
    out.push_back(make("xy-corr" + tag, g, "0", d.xy_correlation,
                       fmt::format("{:.5f}", corr_bound),
                       std::abs(d.xy_correlation) < corr_bound));

    Rng mrng = replica_stream(opt.master_seed + cfg.salt, 2'000'000'011ULL);
    const auto m = general::optional_stopping(report, n_frag, 5, mrng);
    const double mz = std::abs(m.mean - m.expected) / m.std_error;
    out.push_back(make("martingale" + tag, g, fmt::format("z_*^-1 = {:.6f}", m.expected), m.mean,
                       fmt::format("{} SE", 4 * k), mz <= 4.0 * k,
                       fmt::format("SE={:.5f}, |z|={:.2f}", m.std_error, mz)));
  }

  {
    const auto bp = BitcoinParams::from_protocol(0.72, kQ, kRate);
    const double s_values[] = {0.5 * kRate, 1.0 * kRate, 2.0 * kRate};
    Rng rng = replica_stream(opt.master_seed, 3'000'000'019ULL);
    const auto est = bitcoin::busy_period_oracle(bp, pick(opt, 1'000'000, 200'000), s_values, rng);
    double worst = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      worst = std::max(worst, rel_err(est.laplace[i], mm1::busy_lt(bp, s_values[i])));
    }
    out.push_back(make("busy-oracle", g, "B(s), s in {0.5,1,2} x rate", worst,
                       fmt::format("{:.0f}%", 1 * k), worst <= 0.01 * k));
  }
  return out;
}

std::vector<Check> determinism(const Options& opt) {
  std::vector<Check> out;
  const std::string g = "determinism";

  {
    const auto bp = BitcoinParams::from_protocol(0.84, kQ, kRate);
    auto render = [&](unsigned jobs) {
      bitcoin::EnsembleOptions eo;
      eo.n = pick(opt, 4'000, 1'000);
      eo.master_seed = opt.master_seed + 4242;
      eo.jobs = jobs;
      const auto s = bitcoin::run_ensemble(bp, eo);
      std::ostringstream os;
      io::write_samples_csv(os, s);
      os << io::bitcoin_summary_json(bp, s).dump();
      return os.str();
    };
    const auto a = render(1), b = render(8), c = render(8);
    out.push_back(make("determinism-bitcoin", g, "byte-identical (1, 8, 8 threads)",
                       (a == b && b == c) ? 1.0 : 0.0, "exact", a == b && b == c));
  }
  {
    const auto report = solve_thresholds(0.8, DelaySpec::deterministic(2));
    auto render = [&](unsigned jobs) {
      general::LastPassageOptions lo;
      lo.n = pick(opt, 10'000, 2'000);
      lo.master_seed = opt.master_seed + 4343;
      lo.jobs = jobs;
      lo.bootstrap_resamples = 50;
      lo.keep_cycles = true;
      const auto s = general::ensemble_last_passage(report, lo);
      std::ostringstream os;
      io::write_t_cycles_csv(os, s.t_values);
      io::write_cycles_csv(os, s);
      os << io::general_summary_json(report, s, lo.n, lo.master_seed).dump();
      return os.str();
    };
    const auto a = render(1), b = render(8), c = render(8);
    out.push_back(make("determinism-general", g, "byte-identical (1, 8, 8 threads)",
                       (a == b && b == c) ? 1.0 : 0.0, "exact", a == b && b == c));
  }
  return out;
}

std::vector<Check> run_all(const Options& opt) {
  std::vector<Check> all;
  for (auto* group : {&analytic_identities, &paper_numbers, &general_suite, &determinism}) {
    auto part = (*group)(opt);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

std::string format_table(const std::vector<Check>& checks) {
  std::string s = fmt::format("{:<6} {:<34} {:<42} {:>14} {:<12}\n", "status", "check", "target",
                              "observed", "tolerance");
  for (const auto& c : checks) {
    s += fmt::format("{:<6} {:<34} {:<42} {:>14.6g} {:<12}", c.pass ? "PASS" : "FAIL", c.id,
                     c.target, c.observed, c.tolerance);
    if (!c.detail.empty()) s += "  " + c.detail;
    s += '\n';
  }
  return s;
}

}  // namespace cclock::validation
