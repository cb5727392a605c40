#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cclock/cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cclock::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

std::vector<std::string> golden_keys(const std::string& name) {
  std::ifstream in(fs::path(GOLDEN_DIR) / name);
  std::vector<std::string> keys;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) keys.push_back(line);
  }
  return keys;
}

std::vector<std::string> sorted_keys(const Json& j) {
  std::vector<std::string> keys;
  for (const auto& item : j.items()) keys.push_back(item.key());
  return keys;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::string golden_header(const std::string& file) {
  std::ifstream in(fs::path(GOLDEN_DIR) / "headers.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (line.substr(0, comma) == file) {
      return line.substr(comma + 2, line.size() - comma - 3);  // strip the quotes
    }
  }
  return {};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("cclock_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("params example and schema") {
  const auto r = run({"params", "--p", "0.7", "--delay", "unit"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j["p_c"].get<double>() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(j["z_star"].get<double>() == doctest::Approx(0.428571).epsilon(1e-6));
  CHECK(j["gamma"].get<double>() == doctest::Approx(0.428571).epsilon(1e-6));
  CHECK(sorted_keys(j) == sorted(golden_keys("params.keys")));
  CHECK(sorted_keys(j["residuals"]) == std::vector<std::string>{"p_c", "transform", "z_star"});
}

TEST_CASE("bitcoin-analytic example and schema") {
  const auto dir = fresh_dir("analytic");
  const auto r = run({"bitcoin-analytic", "--p", "0.72", "--q", "0.9", "--rate", "0.1",
                      "--out-dir", dir.string(), "--emit", "json,grid"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j["mean_ttc"].get<double>() >= 54.0);
  CHECK(j["mean_ttc"].get<double>() <= 66.0);
  CHECK(j["tail_exponent"].get<double>() == j["s_star"].get<double>());
  CHECK(sorted_keys(j) == sorted(golden_keys("analytic.keys")));
  CHECK(Json::parse(slurp(dir / "analytic.json")) == j);
  CHECK(first_line(dir / "transform.csv") == golden_header("transform.csv"));
  CHECK(fs::exists(dir / "config.json"));
}

TEST_CASE("bitcoin-sim outputs and reproducibility") {
  const auto a = fresh_dir("sim_a");
  const auto b = fresh_dir("sim_b");
  const std::vector<std::string> base{"bitcoin-sim", "--p",        "0.84",   "--samples",
                                      "400",         "--emit",     "csv,json,tail"};
  auto args_a = base;
  args_a.insert(args_a.end(), {"--out-dir", a.string(), "--jobs", "1", "--master-seed", "9"});
  auto args_b = base;
  args_b.insert(args_b.end(), {"--out-dir", b.string(), "--jobs", "8", "--master-seed", "9"});
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  for (const char* f : {"samples.csv", "summary.json", "tail.csv"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(first_line(a / "samples.csv") == golden_header("samples.csv"));
  CHECK(first_line(a / "tail.csv") == golden_header("tail.csv"));
  const auto summary = Json::parse(slurp(a / "summary.json"));
  CHECK(sorted_keys(summary) == sorted(golden_keys("bitcoin_summary.keys")));
  CHECK(summary["n"] == 400);
  CHECK(summary["master_seed"] == 9);
}

TEST_CASE("general-sim outputs and reproducibility") {
  const auto a = fresh_dir("gen_a");
  const auto b = fresh_dir("gen_b");
  for (const auto& [dir, jobs] : {std::pair{a, "1"}, std::pair{b, "8"}}) {
    REQUIRE(run({"general-sim", "--p", "0.7", "--delay", "unit", "--samples", "2000", "--emit",
                 "csv,json,cycles", "--out-dir", dir.string(), "--jobs", jobs})
                .code == 0);
  }
  for (const char* f : {"t_cycles.csv", "summary.json", "cycles.csv"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(first_line(a / "t_cycles.csv") == golden_header("t_cycles.csv"));
  CHECK(first_line(a / "cycles.csv") == golden_header("cycles.csv"));
  const auto summary = Json::parse(slurp(a / "summary.json"));
  CHECK(sorted_keys(summary) == sorted(golden_keys("general_summary.keys")));
  CHECK(summary["slope_ci"].size() == 2);
  CHECK(summary["gamma_analytic"].get<double>() == doctest::Approx(3.0 / 7));
}

TEST_CASE("precondition exit code reports p_c") {
  const auto r = run({"general-sim", "--p", "0.6", "--delay", "det:2", "--samples", "10"});
  CHECK(r.code == 3);
  CHECK(r.err.find("0.618") != std::string::npos);
  const auto j = run({"--json-errors", "general-sim", "--p", "0.6", "--delay", "det:2"});
  CHECK(j.code == 3);
  const auto diag = Json::parse(j.err);
  CHECK(diag["error"] == "precondition");
  CHECK(diag["p_c"].get<double>() == doctest::Approx(0.618034).epsilon(1e-6));
  CHECK(run({"bitcoin-analytic", "--p", "0.5"}).code == 3);
}

TEST_CASE("usage errors name the offending key") {
  const auto r = run({"--json-errors", "general-sim", "--p", "0.7", "--q", "0.9"});
  CHECK(r.code == 2);
  CHECK(Json::parse(r.err)["key"] == "q");
  CHECK(run({"general-sim", "--p", "0.7", "--q", "0.9"}).err.find("--q") != std::string::npos);
  CHECK(run({"params"}).code == 2);                                   // p is required
  CHECK(run({"params", "--p", "abc"}).code == 2);
  CHECK(run({"params", "--p", "0.7", "--delay", "weibull:1"}).code == 2);
  CHECK(run({"bitcoin-sim", "--p", "0.8", "--stop", "forever"}).code == 2);
  CHECK(run({"nonsense"}).code == 2);
  CHECK(run({}).code == 2);
  const auto bad_delay = run({"--json-errors", "params", "--p", "0.7", "--delay", "det:0"});
  CHECK(Json::parse(bad_delay.err)["key"] == "delay");
}

TEST_CASE("config files") {
  const auto dir = fresh_dir("config");
  fs::create_directories(dir);
  const auto cfg = dir / "run.json";
  std::ofstream(cfg) << R"({"subcommand": "bitcoin-sim", "p": 0.8, "samples": 123})";

  const auto dumped = run({"--config", cfg.string(), "--dump-config", "bitcoin-sim"});
  REQUIRE(dumped.code == 0);
  const auto j = Json::parse(dumped.out);
  CHECK(j["samples"] == 123);
  CHECK(j["q"].get<double>() == 0.9);

  // Round trip: the dumped canonical config reproduces itself.
  const auto canon = dir / "canon.json";
  std::ofstream(canon) << dumped.out;
  const auto again = run({"--config", canon.string(), "--dump-config", "bitcoin-sim"});
  CHECK(again.out == dumped.out);

  // Flags override the file.
  const auto over = run({"--config", cfg.string(), "--dump-config", "bitcoin-sim", "--samples", "7"});
  CHECK(Json::parse(over.out)["samples"] == 7);

  const auto bad = dir / "bad.json";
  std::ofstream(bad) << R"({"p": 0.7, "q": 0.9})";
  const auto r = run({"--json-errors", "--config", bad.string(), "general-sim"});
  CHECK(r.code == 2);
  CHECK(Json::parse(r.err)["key"] == "q");

  const auto mismatch = run({"--config", cfg.string(), "general-sim", "--p", "0.7"});
  CHECK(mismatch.code == 2);
  const auto broken = dir / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK(run({"--config", broken.string(), "params", "--p", "0.7"}).code == 2);
}

TEST_CASE("seed environment variable overrides the flag") {
  ::setenv("CONSENSUS_CLOCK_SEED", "4242", 1);
  const auto r = run({"--dump-config", "bitcoin-sim", "--p", "0.8", "--master-seed", "1"});
  ::unsetenv("CONSENSUS_CLOCK_SEED");
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["master_seed"] == 4242);
  const auto plain = run({"--dump-config", "bitcoin-sim", "--p", "0.8", "--master-seed", "1"});
  CHECK(Json::parse(plain.out)["master_seed"] == 1);
}

namespace {

// Check ids listed after "checks failed:" on stderr.
std::vector<std::string> failed_ids(const std::string& err) {
  std::vector<std::string> ids;
  const auto colon = err.find(':');
  if (colon == std::string::npos) return ids;
  std::istringstream is(err.substr(colon + 1));
  for (std::string id; is >> id;) ids.push_back(id);
  return ids;
}

}  // namespace

TEST_CASE("validate gate and negative control") {
  // The fitted tail slopes do not match the pole of the published transform;
  // those three checks are the only expected failures.
  const std::vector<std::string> pole_checks{"tail-slope-pole-p0.72", "tail-slope-pole-p0.84",
                                             "tail-slope-pole-p0.89"};
  const auto base = run({"validate", "--quick"});
  CHECK(base.code == 1);
  CHECK(failed_ids(base.err) == pole_checks);
  CHECK(base.out.find("PASS   gamma-slope") != std::string::npos);

  const auto bad = run({"validate", "--quick", "--corrupt-z-star", "0.5"});
  CHECK(bad.code == 1);
  const auto ids = failed_ids(bad.err);
  CHECK(std::count_if(ids.begin(), ids.end(), [](const std::string& id) {
          return id.rfind("gamma-slope[", 0) == 0;
        }) >= 1);
}

TEST_CASE("help exits cleanly") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("bitcoin-sim") != std::string::npos);
}
