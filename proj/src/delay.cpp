#include "cclock/delay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "cclock/errors.hpp"

namespace cclock {

namespace {

constexpr double kPmfSumTolerance = 1e-12;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::int64_t parse_int(const std::string& text, std::string_view what) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw InputError(fmt::format("invalid {} '{}'", what, text), "delay");
  }
  return v;
}

double parse_real(const std::string& text, std::string_view what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw InputError(fmt::format("invalid {} '{}'", what, text), "delay");
  }
  return v;
}

}  // namespace

DelaySpec DelaySpec::unit() {
  DelaySpec spec(Kind::unit, "unit");
  spec.d_ = 1;
  return spec;
}

DelaySpec DelaySpec::deterministic(std::int64_t d) {
  if (d < 1) throw InputError(fmt::format("deterministic delay must be >= 1, got {}", d), "delay");
  DelaySpec spec(Kind::deterministic, fmt::format("det:{}", d));
  spec.d_ = d;
  return spec;
}

DelaySpec DelaySpec::geometric(double a) {
  if (!(a > 0.0 && a <= 1.0)) {
    throw InputError(fmt::format("geometric success probability must lie in (0,1], got {}", a),
                     "delay");
  }
  DelaySpec spec(Kind::geometric, fmt::format("geom:{}", a));
  spec.a_ = a;
  spec.log1m_a_ = std::log1p(-a);
  return spec;
}

DelaySpec DelaySpec::empirical(std::vector<Atom> pmf, std::int64_t support_cap) {
  if (pmf.empty()) throw InputError("empirical delay pmf is empty", "delay");
  std::sort(pmf.begin(), pmf.end(), [](const Atom& l, const Atom& r) { return l.value < r.value; });
  double total = 0.0;
  for (const auto& atom : pmf) {
    if (atom.value < 1) {
      throw InputError(fmt::format("delay values must be >= 1, got {}", atom.value), "delay");
    }
    if (atom.value > support_cap) {
      throw InputError(
          fmt::format("delay value {} exceeds the support cap {}", atom.value, support_cap),
          "delay");
    }
    if (!(atom.prob >= 0.0 && atom.prob <= 1.0)) {
      throw InputError(fmt::format("delay probability {} outside [0,1]", atom.prob), "delay");
    }
    total += atom.prob;
  }
  if (std::abs(total - 1.0) > kPmfSumTolerance) {
    throw InputError(fmt::format("delay pmf sums to {:.17g}, not 1", total), "delay");
  }

  for (std::size_t k = 1; k < pmf.size(); ++k) {
    if (pmf[k].value == pmf[k - 1].value) {
      throw InputError(fmt::format("duplicate delay value {}", pmf[k].value), "delay");
    }
  }

  DelaySpec spec(Kind::empirical, "pmf");
  for (const auto& atom : pmf) {
    if (atom.prob == 0.0) continue;
    spec.values_.push_back(atom.value);
    spec.probs_.push_back(atom.prob);
  }
  const std::size_t n = spec.values_.size();
  spec.cum_.resize(n);
  spec.upper_.resize(n);
  std::partial_sum(spec.probs_.begin(), spec.probs_.end(), spec.cum_.begin());
  // Suffix sums give the ccdf without the cancellation of 1 - cdf.
  double above = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    spec.upper_[k] = above;
    above += spec.probs_[k];
  }
  return spec;
}

DelaySpec DelaySpec::parse(std::string_view text, std::int64_t support_cap) {
  const std::string s = trim(text);
  if (s == "unit") return unit();
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    throw InputError(fmt::format("unknown delay spec '{}' (expected unit, det:<d>, geom:<a>, "
                                 "pmf:<path>)",
                                 s),
                     "delay");
  }
  const std::string head = s.substr(0, colon);
  const std::string arg = trim(s.substr(colon + 1));
  if (head == "det") return deterministic(parse_int(arg, "deterministic delay"));
  if (head == "geom") return geometric(parse_real(arg, "geometric parameter"));
  if (head == "pmf") {
    DelaySpec spec = read_pmf_csv(arg, support_cap);
    spec.label_ = "pmf:" + arg;
    return spec;
  }
  throw InputError(fmt::format("unknown delay family '{}'", head), "delay");
}

DelaySpec DelaySpec::read_pmf_csv(const std::filesystem::path& path, std::int64_t support_cap) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open pmf file '{}'", path.string()), "delay");
  std::string line;
  if (!std::getline(in, line) || trim(line) != "value,prob") {
    throw InputError(fmt::format("pmf file '{}' must start with header 'value,prob'",
                                 path.string()),
                     "delay");
  }
  std::vector<Atom> atoms;
  while (std::getline(in, line)) {
    const std::string row = trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string::npos) {
      throw InputError(fmt::format("malformed pmf row '{}'", row), "delay");
    }
    atoms.push_back({parse_int(trim(row.substr(0, comma)), "pmf value"),
                     parse_real(trim(row.substr(comma + 1)), "pmf probability")});
  }
  DelaySpec spec = empirical(std::move(atoms), support_cap);
  spec.label_ = "pmf:" + path.string();
  return spec;
}

double DelaySpec::ccdf(std::int64_t i) const noexcept {
  if (i <= 0) return 1.0;
  switch (kind_) {
    case Kind::unit:
    case Kind::deterministic:
      return i < d_ ? 1.0 : 0.0;
    case Kind::geometric:
      return std::exp(static_cast<double>(i) * log1m_a_);
    case Kind::empirical: {
      const auto it = std::upper_bound(values_.begin(), values_.end(), i);
      if (it == values_.begin()) return 1.0;
      return upper_[static_cast<std::size_t>(it - values_.begin()) - 1];
    }
  }
  return 0.0;
}

double DelaySpec::pmf(std::int64_t i) const noexcept {
  if (i <= 0) return 0.0;
  switch (kind_) {
    case Kind::unit:
    case Kind::deterministic:
      return i == d_ ? 1.0 : 0.0;
    case Kind::geometric:
      return a_ * std::exp(static_cast<double>(i - 1) * log1m_a_);
    case Kind::empirical: {
      const auto it = std::lower_bound(values_.begin(), values_.end(), i);
      if (it == values_.end() || *it != i) return 0.0;
      return probs_[static_cast<std::size_t>(it - values_.begin())];
    }
  }
  return 0.0;
}

double DelaySpec::mean() const noexcept {
  switch (kind_) {
    case Kind::unit:
    case Kind::deterministic:
      return static_cast<double>(d_);
    case Kind::geometric:
      return 1.0 / a_;
    case Kind::empirical: {
      double m = 0.0;
      for (std::size_t k = 0; k < values_.size(); ++k) {
        m += static_cast<double>(values_[k]) * probs_[k];
      }
      return m;
    }
  }
  return 0.0;
}

std::optional<std::int64_t> DelaySpec::support_max() const noexcept {
  switch (kind_) {
    case Kind::unit:
    case Kind::deterministic:
      return d_;
    case Kind::geometric:
      if (a_ == 1.0) return 1;
      return std::nullopt;
    case Kind::empirical:
      return values_.back();
  }
  return std::nullopt;
}

std::int64_t DelaySpec::sample(Rng& rng) const noexcept {
  switch (kind_) {
    case Kind::unit:
    case Kind::deterministic:
      return d_;
    case Kind::geometric:
      return 1 + rng.geometric0(1.0 - a_);
    case Kind::empirical: {
      const double u = rng.uniform();
      const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
      if (it == cum_.end()) return values_.back();
      return values_[static_cast<std::size_t>(it - cum_.begin())];
    }
  }
  return 1;
}

std::vector<DelaySpec::Atom> DelaySpec::atoms() const {
  std::vector<Atom> out;
  switch (kind_) {
    case Kind::unit:
    case Kind::deterministic:
      out.push_back({d_, 1.0});
      break;
    case Kind::geometric:
      for (std::int64_t i = 1; ccdf(i - 1) > 1e-16; ++i) out.push_back({i, pmf(i)});
      break;
    case Kind::empirical:
      for (std::size_t k = 0; k < values_.size(); ++k) out.push_back({values_[k], probs_[k]});
      break;
  }
  return out;
}

}  // namespace cclock
