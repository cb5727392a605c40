#pragma once

#include <algorithm>
#include <cmath>

namespace cclock::stats {

template <class Stat>
Interval bootstrap_interval(std::size_t n, std::size_t resamples, std::uint64_t seed, double level,
                            Stat&& stat) {
  std::vector<double> values;
  values.reserve(resamples);
  std::vector<std::size_t> idx(n);
  for (std::size_t b = 0; b < resamples; ++b) {
    Rng rng = replica_stream(seed, b);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
    const double v = stat(idx);
    if (std::isfinite(v)) values.push_back(v);
  }
  if (values.empty()) return {NAN, NAN};
  std::sort(values.begin(), values.end());
  const double alpha = 0.5 * (1.0 - level);
  auto at = [&](double q) {
    const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(values.size() - 1)));
    return values[std::min(k, values.size() - 1)];
  };
  return {at(alpha), at(1.0 - alpha)};
}

}  // namespace cclock::stats
