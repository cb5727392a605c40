#include "cclock/run_config.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cclock/errors.hpp"

namespace cclock::cli {

namespace {

using VT = ValueType;

std::vector<KeySpec> common_sim_keys() {
  return {
      {"master_seed", "--master-seed", VT::seed, 1,
       "ensemble master seed (env CONSENSUS_CLOCK_SEED overrides)", {}},
      {"jobs", "--jobs", VT::integer, 0, "worker threads, 0 = all cores", {}},
      {"out_dir", "--out-dir", VT::text, ".", "directory for emitted files", {}},
  };
}

std::map<std::string, std::vector<KeySpec>> build_schemas() {
  std::map<std::string, std::vector<KeySpec>> m;
  m["params"] = {
      {"p", "--p", VT::real, nullptr, "honest step probability", {}},
      {"delay", "--delay", VT::text, "unit", "delay law: unit | det:<d> | geom:<a> | pmf:<path>", {}},
      {"tol", "--tol", VT::real, 1e-12, "bisection tolerance", {}},
      {"pmf_cap", "--pmf-cap", VT::integer, 10000, "largest admissible pmf value", {}},
      {"out_dir", "--out-dir", VT::text, ".", "directory for emitted files", {}},
      {"emit", "--emit", VT::list, Json::array(), "files to write: json", {"json"}},
  };
  m["bitcoin-analytic"] = {
      {"p", "--p", VT::real, nullptr, "honest step probability", {}},
      {"q", "--q", VT::real, 0.9, "probability an honest block is seen in time", {}},
      {"rate_scale", "--rate", VT::real, 0.1, "events per minute (lambda + mu)", {}},
      {"start", "--start", VT::text, "tie", "initial condition", {"tie", "stationary"}},
      {"grid_points", "--grid-points", VT::integer, 50, "points of the transform grid", {}},
      {"out_dir", "--out-dir", VT::text, ".", "directory for emitted files", {}},
      {"emit", "--emit", VT::list, Json::array(), "files to write: json,grid", {"json", "grid"}},
  };
  auto sim = std::vector<KeySpec>{
      {"p", "--p", VT::real, nullptr, "honest step probability", {}},
      {"q", "--q", VT::real, 0.9, "probability an honest block is seen in time", {}},
      {"rate_scale", "--rate", VT::real, 0.1, "events per minute (lambda + mu)", {}},
      {"samples", "--samples", VT::integer, 25000, "replicas", {}},
      {"stop", "--stop", VT::text, "paper-proxy", "stop rule", {"paper-proxy", "lead-cap"}},
      {"proxy_blocks", "--proxy-blocks", VT::integer, 1000, "paper-proxy block count", {}},
      {"lead_eps", "--lead-eps", VT::real, 1e-10, "lead-cap residual bound", {}},
      {"threshold_min", "--threshold-min", VT::real, 60.0, "exceedance threshold (minutes)", {}},
      {"start", "--start", VT::text, "tie", "initial condition", {"tie", "stationary"}},
      {"tail_points", "--tail-points", VT::integer, 300, "grid points of the tail table", {}},
      {"emit", "--emit", VT::list, Json::array(), "files to write: csv,json,tail",
       {"csv", "json", "tail"}},
  };
  for (auto& k : common_sim_keys()) sim.push_back(k);
  m["bitcoin-sim"] = sim;
  auto gen = std::vector<KeySpec>{
      {"p", "--p", VT::real, nullptr, "honest step probability", {}},
      {"delay", "--delay", VT::text, "unit", "delay law: unit | det:<d> | geom:<a> | pmf:<path>", {}},
      {"samples", "--samples", VT::integer, 100000, "replicas", {}},
      {"stop_eps", "--stop-eps", VT::real, 1e-10, "stop once z_*^S falls below this", {}},
      {"bootstrap", "--bootstrap", VT::integer, 200, "bootstrap resamples for the slope CI", {}},
      {"tol", "--tol", VT::real, 1e-12, "bisection tolerance", {}},
      {"pmf_cap", "--pmf-cap", VT::integer, 10000, "largest admissible pmf value", {}},
      {"emit", "--emit", VT::list, Json::array(), "files to write: csv,json,cycles",
       {"csv", "json", "cycles"}},
  };
  for (auto& k : common_sim_keys()) gen.push_back(k);
  m["general-sim"] = gen;
  m["validate"] = {
      {"quick", "--quick", VT::flag, false, "reduced ensembles, doubled tolerances", {}},
      {"jobs", "--jobs", VT::integer, 0, "worker threads, 0 = all cores", {}},
      {"master_seed", "--master-seed", VT::seed, 20240917, "validation master seed", {}},
      {"corrupt_z_star", "--corrupt-z-star", VT::real, 1.0,
       "test hook: multiply z_* by this factor before forming gamma", {}},
  };
  return m;
}

const std::map<std::string, std::vector<KeySpec>>& schemas() {
  static const auto m = build_schemas();
  return m;
}

const KeySpec* find_key(const std::vector<KeySpec>& keys, const std::string& key) {
  for (const auto& k : keys) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

void check_choice(const KeySpec& spec, const std::string& v) {
  if (spec.choices.empty()) return;
  if (std::find(spec.choices.begin(), spec.choices.end(), v) == spec.choices.end()) {
    throw InputError(fmt::format("invalid value '{}' for key '{}' (allowed: {})", v, spec.key,
                                 fmt::join(spec.choices, ", ")),
                     spec.key);
  }
}

Json check_type(const KeySpec& spec, const Json& v) {
  auto bad = [&] {
    return InputError(fmt::format("key '{}' has the wrong type: {}", spec.key, v.dump()),
                      spec.key);
  };
  switch (spec.type) {
    case VT::real:
      if (!v.is_number()) throw bad();
      return Json(v.get<double>());
    case VT::integer:
      if (!v.is_number_integer()) throw bad();
      return Json(v.get<std::int64_t>());
    case VT::seed:
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw bad();
      }
      return Json(v.get<std::uint64_t>());
    case VT::text:
      if (!v.is_string()) throw bad();
      check_choice(spec, v.get<std::string>());
      return v;
    case VT::list: {
      if (!v.is_array()) throw bad();
      Json out = Json::array();
      for (const auto& e : v) {
        if (!e.is_string()) throw bad();
        check_choice(spec, e.get<std::string>());
        out.push_back(e);
      }
      return out;
    }
    case VT::flag:
      if (!v.is_boolean()) throw bad();
      return v;
  }
  throw bad();
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"params", "bitcoin-analytic", "bitcoin-sim",
                                                 "general-sim", "validate"};
  return names;
}

const std::vector<KeySpec>& schema(const std::string& subcommand) {
  const auto it = schemas().find(subcommand);
  if (it == schemas().end()) {
    throw InputError(fmt::format("unknown subcommand '{}'", subcommand), "subcommand");
  }
  return it->second;
}

Json parse_value(const KeySpec& spec, const std::string& text) {
  auto bad = [&] {
    return InputError(fmt::format("invalid value '{}' for {}", text, spec.flag), spec.key);
  };
  try {
    std::size_t used = 0;
    switch (spec.type) {
      case VT::real: {
        const double v = std::stod(text, &used);
        if (used != text.size()) throw bad();
        return Json(v);
      }
      case VT::integer: {
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw bad();
        return Json(static_cast<std::int64_t>(v));
      }
      case VT::seed: {
        if (!text.empty() && text[0] == '-') throw bad();
        const unsigned long long v = std::stoull(text, &used, 0);
        if (used != text.size()) throw bad();
        return Json(static_cast<std::uint64_t>(v));
      }
      case VT::text:
        return Json(text);
      case VT::list: {
        Json out = Json::array();
        std::size_t start = 0;
        while (start <= text.size()) {
          const auto comma = text.find(',', start);
          const auto item = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start);
          if (!item.empty()) out.push_back(item);
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
        return out;
      }
      case VT::flag:
        return Json(text == "true" || text == "1");
    }
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw bad();
  }
  throw bad();
}

RunConfig RunConfig::from_json(const Json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object", "subcommand");
  if (!j.contains("subcommand") || !j["subcommand"].is_string()) {
    throw InputError("config is missing the 'subcommand' key", "subcommand");
  }
  RunConfig cfg;
  cfg.subcommand_ = j["subcommand"].get<std::string>();
  const auto& keys = schema(cfg.subcommand_);
  for (const auto& [key, value] : j.items()) {
    if (key == "subcommand") continue;
    if (!find_key(keys, key)) {
      throw InputError(fmt::format("key '{}' is not accepted by '{}'", key, cfg.subcommand_), key);
    }
  }
  cfg.values_ = Json::object();
  for (const auto& spec : keys) {
    if (j.contains(spec.key) && !j[spec.key].is_null()) {
      cfg.values_[spec.key] = check_type(spec, j[spec.key]);
    } else if (spec.default_value.is_null()) {
      throw InputError(fmt::format("missing required key '{}' ({})", spec.key, spec.flag),
                       spec.key);
    } else {
      cfg.values_[spec.key] = spec.default_value;
    }
  }
  return cfg;
}

Json RunConfig::to_json() const {
  Json j = values_;
  j["subcommand"] = subcommand_;
  return j;
}

double RunConfig::real(const std::string& key) const { return values_.at(key).get<double>(); }

std::int64_t RunConfig::integer(const std::string& key) const {
  return values_.at(key).get<std::int64_t>();
}

std::uint64_t RunConfig::seed(const std::string& key) const {
  return values_.at(key).get<std::uint64_t>();
}

std::string RunConfig::text(const std::string& key) const {
  return values_.at(key).get<std::string>();
}

std::vector<std::string> RunConfig::list(const std::string& key) const {
  return values_.at(key).get<std::vector<std::string>>();
}

bool RunConfig::flag(const std::string& key) const { return values_.at(key).get<bool>(); }

}  // namespace cclock::cli
