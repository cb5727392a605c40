#include <cmath>
#include <filesystem>
#include <fstream>

#include "cclock/delay.hpp"
#include "cclock/errors.hpp"
#include "doctest.h"

using cclock::DelaySpec;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("ccdf examples") {
  CHECK(DelaySpec::unit().ccdf(0) == 1.0);
  CHECK(DelaySpec::unit().ccdf(1) == 0.0);
  CHECK(DelaySpec::deterministic(2).ccdf(1) == 1.0);
  CHECK(DelaySpec::deterministic(2).ccdf(2) == 0.0);
  CHECK(DelaySpec::geometric(0.5).ccdf(2) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("mean examples") {
  CHECK(DelaySpec::unit().mean() == 1.0);
  CHECK(DelaySpec::deterministic(3).mean() == 3.0);
  CHECK(DelaySpec::geometric(0.5).mean() == doctest::Approx(2.0));
}

TEST_CASE("sample examples") {
  cclock::Rng rng(3);
  CHECK(DelaySpec::unit().sample(rng) == 1);
  CHECK(DelaySpec::deterministic(5).sample(rng) == 5);
  const auto emp = DelaySpec::empirical({{1, 0.5}, {3, 0.5}});
  int ones = 0;
  constexpr int n = 1'000'000;
  for (int i = 0; i < n; ++i) ones += emp.sample(rng) == 1 ? 1 : 0;
  CHECK(std::abs(static_cast<double>(ones) / n - 0.5) < 0.002);
}

TEST_CASE("pmf telescopes to one and ccdf is non-increasing") {
  const DelaySpec specs[] = {DelaySpec::unit(), DelaySpec::deterministic(4),
                             DelaySpec::geometric(0.3),
                             DelaySpec::empirical({{1, 0.2}, {2, 0.3}, {7, 0.5}})};
  for (const auto& spec : specs) {
    CAPTURE(spec.label());
    CHECK(spec.ccdf(0) == 1.0);
    double total = 0.0;
    for (std::int64_t i = 1; i <= 200; ++i) {
      total += spec.ccdf(i - 1) - spec.ccdf(i);
      CHECK(spec.ccdf(i) <= spec.ccdf(i - 1));
      CHECK(spec.pmf(i) == doctest::Approx(spec.ccdf(i - 1) - spec.ccdf(i)).epsilon(1e-12));
    }
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("sampler frequencies and mean within 4 SE at 1e6 draws") {
  const auto emp = DelaySpec::empirical({{1, 0.2}, {2, 0.3}, {7, 0.5}});
  const auto geo = DelaySpec::geometric(0.25);
  cclock::Rng rng(11);
  constexpr int n = 1'000'000;
  std::vector<int> counts(8, 0);
  double sum_geo = 0, sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    ++counts[static_cast<std::size_t>(emp.sample(rng))];
    const auto g = static_cast<double>(geo.sample(rng));
    sum_geo += g;
    sum_sq += g * g;
  }
  for (std::int64_t v : {1, 2, 7}) {
    const double pr = emp.pmf(v);
    const double se = std::sqrt(pr * (1 - pr) / n);
    CHECK(std::abs(counts[static_cast<std::size_t>(v)] / double(n) - pr) < 4 * se);
  }
  const double mean = sum_geo / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - geo.mean()) < 4 * se);
}

TEST_CASE("parse round-trips labels") {
  for (const char* text : {"unit", "det:3", "geom:0.25"}) {
    const auto spec = DelaySpec::parse(text);
    CHECK(spec.label() == text);
    CHECK(DelaySpec::parse(spec.label()).mean() == spec.mean());
  }
  CHECK(DelaySpec::parse(" det:2 ").kind() == DelaySpec::Kind::deterministic);
}

TEST_CASE("pmf files") {
  const auto good = write_temp("cclock_pmf_good.csv", "value,prob\n1,0.25\n4,0.75\n");
  const auto spec = DelaySpec::parse("pmf:" + good.string());
  CHECK(spec.kind() == DelaySpec::Kind::empirical);
  CHECK(spec.mean() == doctest::Approx(3.25));
  CHECK(spec.ccdf(3) == doctest::Approx(0.75));
  CHECK(spec.support_max() == 4);

  const auto header = write_temp("cclock_pmf_header.csv", "v,p\n1,1\n");
  CHECK_THROWS_AS(DelaySpec::parse("pmf:" + header.string()), cclock::InputError);
  const auto sum = write_temp("cclock_pmf_sum.csv", "value,prob\n1,0.5\n2,0.4\n");
  CHECK_THROWS_AS(DelaySpec::parse("pmf:" + sum.string()), cclock::InputError);
  CHECK_THROWS_AS(DelaySpec::parse("pmf:/nonexistent/file.csv"), cclock::InputError);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(DelaySpec::deterministic(0), cclock::InputError);
  CHECK_THROWS_AS(DelaySpec::empirical({{0, 1.0}}), cclock::InputError);
  CHECK_THROWS_AS(DelaySpec::empirical({{1, 0.5}, {1, 0.5}}), cclock::InputError);
  CHECK_THROWS_AS(DelaySpec::empirical({{20'000, 1.0}}), cclock::InputError);
  CHECK_NOTHROW(DelaySpec::empirical({{20'000, 1.0}}, 50'000));
  CHECK_THROWS_AS(DelaySpec::geometric(0.0), cclock::InputError);
  CHECK_THROWS_AS(DelaySpec::parse("det:x"), cclock::InputError);
  CHECK_THROWS_AS(DelaySpec::parse("weibull:2"), cclock::InputError);
  CHECK_THROWS_AS(DelaySpec::parse("fixed"), cclock::InputError);
}
