#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cclock/rng.hpp"

namespace cclock::stats {

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

MeanEstimate mean_estimate(std::span<const double> xs);

double pearson(std::span<const double> x, std::span<const double> y);

/// Weighted least squares on an arbitrary design; returns coefficients and
/// their standard errors (residual-variance scaled).
struct LinearFit {
  std::vector<double> coef;
  std::vector<double> std_error;
};
LinearFit least_squares(const std::vector<std::vector<double>>& rows, std::span<const double> y,
                        std::span<const double> weights = {});

/// y = intercept + slope x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  std::size_t points = 0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights = {});

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit. Cells are taken in order and the tail is pooled
/// so that every cell's expected count is at least `min_expected`.
/// `probs` need not sum to one; the remainder goes to the last pooled cell.
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                               std::span<const double> probs, double min_expected = 5.0);

/// Survival estimate at a grid point: fraction and count of samples > t.
struct SurvivalPoint {
  double t;
  double survival;
  std::size_t count;
};

/// P(X > t) on `grid`, from samples sorted ascending.
std::vector<SurvivalPoint> survival_strict(std::span<const double> sorted,
                                           std::span<const double> grid);

/// Percentile bootstrap interval of a statistic over resampled index sets.
struct Interval {
  double lo;
  double hi;
};
template <class Stat>
Interval bootstrap_interval(std::size_t n, std::size_t resamples, std::uint64_t seed, double level,
                            Stat&& stat);

}  // namespace cclock::stats

#include "cclock/stats_impl.hpp"
