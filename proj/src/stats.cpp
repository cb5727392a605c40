#include "cclock/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "cclock/errors.hpp"

namespace cclock::stats {

MeanEstimate mean_estimate(std::span<const double> xs) {
  MeanEstimate est;
  est.n = xs.size();
  if (xs.empty()) return est;
  // Two passes in index order keep the result independent of how xs was produced.
  double sum = 0.0;
  for (double x : xs) sum += x;
  est.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - est.mean) * (x - est.mean);
    est.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return est;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("pearson needs paired samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

LinearFit least_squares(const std::vector<std::vector<double>>& rows, std::span<const double> y,
                        std::span<const double> weights) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0 || static_cast<std::size_t>(n) != y.size()) {
    throw DomainError("least_squares: design and response sizes differ");
  }
  const auto k = static_cast<Eigen::Index>(rows.front().size());
  if (n < k) throw DomainError("least_squares: fewer points than coefficients");
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sw = weights.empty() ? 1.0 : std::sqrt(weights[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = sw * rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    b(i) = sw * y[static_cast<std::size_t>(i)];
  }
  const auto qr = x.colPivHouseholderQr();
  if (qr.rank() < k) throw DomainError("least_squares: rank-deficient design");
  const Eigen::VectorXd coef = qr.solve(b);
  const Eigen::VectorXd resid = b - x * coef;
  const double dof = static_cast<double>(n - k);
  const double sigma2 = dof > 0 ? resid.squaredNorm() / dof : 0.0;
  const Eigen::MatrixXd cov = sigma2 * (x.transpose() * x).inverse();

  LinearFit fit;
  for (Eigen::Index j = 0; j < k; ++j) {
    fit.coef.push_back(coef(j));
    fit.std_error.push_back(std::sqrt(std::max(0.0, cov(j, j))));
  }
  return fit;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights) {
  std::vector<std::vector<double>> rows;
  rows.reserve(x.size());
  for (double xi : x) rows.push_back({1.0, xi});
  const auto fit = least_squares(rows, y, weights);
  return {fit.coef[1], fit.coef[0], fit.std_error[1], x.size()};
}

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                               std::span<const double> probs, double min_expected) {
  if (observed.size() != probs.size() || observed.empty()) {
    throw DomainError("chi_square_gof: observed and probs sizes differ");
  }
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  if (total <= 0.0) throw DomainError("chi_square_gof: no observations");

  std::vector<double> obs_cells, exp_cells;
  double acc_obs = 0.0, acc_exp = 0.0, used_prob = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    acc_obs += static_cast<double>(observed[i]);
    acc_exp += total * probs[i];
    used_prob += probs[i];
    if (acc_exp >= min_expected) {
      obs_cells.push_back(acc_obs);
      exp_cells.push_back(acc_exp);
      acc_obs = acc_exp = 0.0;
    }
  }
  // Leftover observed counts and unassigned probability mass join the last cell.
  acc_exp += total * std::max(0.0, 1.0 - used_prob);
  if (obs_cells.empty()) {
    obs_cells.push_back(acc_obs);
    exp_cells.push_back(acc_exp);
  } else {
    obs_cells.back() += acc_obs;
    exp_cells.back() += acc_exp;
  }

  ChiSquareResult res;
  for (std::size_t i = 0; i < obs_cells.size(); ++i) {
    const double d = obs_cells[i] - exp_cells[i];
    res.statistic += d * d / exp_cells[i];
  }
  res.dof = static_cast<int>(obs_cells.size()) - 1;
  if (res.dof >= 1) {
    boost::math::chi_squared dist(res.dof);
    res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
  }
  return res;
}

std::vector<SurvivalPoint> survival_strict(std::span<const double> sorted,
                                           std::span<const double> grid) {
  std::vector<SurvivalPoint> out;
  out.reserve(grid.size());
  const double n = static_cast<double>(sorted.size());
  for (double t : grid) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
    const auto count = static_cast<std::size_t>(sorted.end() - it);
    out.push_back({t, n > 0 ? static_cast<double>(count) / n : 0.0, count});
  }
  return out;
}

}  // namespace cclock::stats
