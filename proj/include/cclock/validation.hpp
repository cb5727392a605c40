#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cclock::validation {

struct Check {
  std::string id;
  std::string group;
  std::string target;
  double observed = 0.0;
  std::string tolerance;
  bool pass = false;
  std::string detail;
};

struct Options {
  bool quick = false;            // smaller ensembles, doubled tolerances
  unsigned jobs = 0;
  std::uint64_t master_seed = 20240917;
  double z_star_factor = 1.0;    // test hook: scales z_* before gamma is formed
};

std::vector<Check> analytic_identities(const Options& opt);
std::vector<Check> paper_numbers(const Options& opt);
std::vector<Check> general_suite(const Options& opt);
std::vector<Check> determinism(const Options& opt);

/// All groups in the order above.
std::vector<Check> run_all(const Options& opt);

/// Fixed-width table: status, id, target, observed, tolerance.
std::string format_table(const std::vector<Check>& checks);

}  // namespace cclock::validation
