#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cclock/rng.hpp"

namespace cclock {

/// Law of the network delay xi on {1, 2, ...}.
///
/// Four families: unit (xi = 1), deterministic(d), geometric(a) with
/// P(xi = k) = a (1-a)^(k-1), and a finite empirical pmf. Values are
/// immutable after construction.
class DelaySpec {
 public:
  enum class Kind { unit, deterministic, geometric, empirical };

  struct Atom {
    std::int64_t value;
    double prob;
  };

  static constexpr std::int64_t kDefaultSupportCap = 10'000;

  static DelaySpec unit();
  static DelaySpec deterministic(std::int64_t d);
  static DelaySpec geometric(double a);
  static DelaySpec empirical(std::vector<Atom> pmf,
                             std::int64_t support_cap = kDefaultSupportCap);

  /// Parses `unit`, `det:<d>`, `geom:<a>` or `pmf:<path>`.
  static DelaySpec parse(std::string_view text, std::int64_t support_cap = kDefaultSupportCap);

  /// Reads a CSV file with header `value,prob`.
  static DelaySpec read_pmf_csv(const std::filesystem::path& path,
                                std::int64_t support_cap = kDefaultSupportCap);

  Kind kind() const noexcept { return kind_; }

  /// Canonical textual form; parse(label()) reproduces the law.
  const std::string& label() const noexcept { return label_; }

  /// P(xi > i). Equals 1 for i <= 0.
  double ccdf(std::int64_t i) const noexcept;

  /// P(xi <= i).
  double cdf(std::int64_t i) const noexcept { return 1.0 - ccdf(i); }

  /// P(xi = i).
  double pmf(std::int64_t i) const noexcept;

  double mean() const noexcept;

  /// Largest value with positive mass; empty for the geometric family.
  std::optional<std::int64_t> support_max() const noexcept;

  std::int64_t sample(Rng& rng) const noexcept;

  /// Atoms of the law; for the geometric family, truncated where the ccdf drops below 1e-16.
  std::vector<Atom> atoms() const;

 private:
  DelaySpec(Kind kind, std::string label) : kind_(kind), label_(std::move(label)) {}

  Kind kind_;
  std::string label_;
  std::int64_t d_ = 1;
  double a_ = 1.0;
  double log1m_a_ = 0.0;
  std::vector<std::int64_t> values_;  // sorted, strictly increasing
  std::vector<double> probs_;
  std::vector<double> cum_;           // cum_[k] = P(xi <= values_[k])
  std::vector<double> upper_;         // upper_[k] = P(xi > values_[k]), summed from the top
};

}  // namespace cclock
