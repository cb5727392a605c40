#include "cclock/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "cclock/bitcoin_sim.hpp"
#include "cclock/errors.hpp"
#include "cclock/general_sim.hpp"
#include "cclock/io.hpp"
#include "cclock/mm1.hpp"
#include "cclock/threshold.hpp"
#include "cclock/validation.hpp"

namespace cclock::cli {

namespace {

constexpr const char* kSeedEnv = "CONSENSUS_CLOCK_SEED";

struct Invocation {
  RunConfig config;
  bool json_errors = false;
  bool dump_config = false;
};

// Thrown for --help; carries the text to print.
struct HelpRequest {
  std::string text;
};

bool wants_json_errors(const std::vector<std::string>& args) {
  return std::find(args.begin(), args.end(), "--json-errors") != args.end();
}

Invocation parse_invocation(const std::vector<std::string>& args) {
  CLI::App app{"Time-to-consensus analytics and simulation for Nakamoto blockchains",
               "consensus-clock"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  bool json_errors = false;
  bool dump_config = false;
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_flag("--json-errors", json_errors, "machine-readable JSON diagnostics on stderr");
  app.add_flag("--dump-config", dump_config, "print the canonical config and exit");

  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, bool>> flags;
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name);
    for (const auto& spec : schema(name)) {
      if (spec.type == ValueType::flag) {
        sub->add_flag(spec.flag, flags[name][spec.key], spec.help);
      } else {
        sub->add_option_function<std::string>(
            spec.flag, [&raw, name, key = spec.key](const std::string& v) { raw[name][key] = v; },
            spec.help);
      }
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequest{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequest{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ExtrasError& e) {
    // Extras arrive in reverse order; report the first offending flag as typed.
    for (const auto& a : args) {
      if (a.rfind("--", 0) != 0) continue;
      const std::string flag = a.substr(0, a.find('='));
      if (std::string(e.what()).find(flag) == std::string::npos) continue;
      throw InputError(fmt::format("option '{}' is not accepted here", flag), flag.substr(2));
    }
    throw InputError(e.what());
  } catch (const CLI::ParseError& e) {
    std::string key;
    const std::string what = e.what();
    // Name the offending flag when CLI11 reports one.
    const auto dash = what.find("--");
    if (dash != std::string::npos) {
      const auto end = what.find_first_of(" \n,", dash);
      key = what.substr(dash + 2, end == std::string::npos ? std::string::npos : end - dash - 2);
    }
    throw InputError(what, key);
  }

  std::string name;
  for (const auto* sub : app.get_subcommands()) name = sub->get_name();

  Json merged = Json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw InputError(fmt::format("cannot open config '{}'", config_path), "config");
    try {
      merged = Json::parse(in);
    } catch (const Json::exception& e) {
      throw InputError(fmt::format("config '{}' is not valid JSON: {}", config_path, e.what()),
                       "config");
    }
    if (!merged.is_object()) throw InputError("config must be a JSON object", "config");
    if (merged.contains("subcommand") && merged["subcommand"] != name) {
      throw InputError(fmt::format("config is for '{}' but the subcommand is '{}'",
                                   merged["subcommand"].dump(), name),
                       "subcommand");
    }
  }
  merged["subcommand"] = name;
  for (const auto& spec : schema(name)) {
    if (auto it = raw[name].find(spec.key); it != raw[name].end()) {
      merged[spec.key] = parse_value(spec, it->second);
    }
    if (spec.type == ValueType::flag && flags[name][spec.key]) merged[spec.key] = true;
  }
  if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
    for (const auto& spec : schema(name)) {
      if (spec.key == "master_seed") merged["master_seed"] = parse_value(spec, env);
    }
  }
  return {RunConfig::from_json(merged), json_errors, dump_config};
}

std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir = cfg.text("out_dir");
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(fmt::format("cannot write '{}'", path.string()));
  os << content;
  if (!os) throw Error(fmt::format("failed writing '{}'", path.string()));
}

bool emits(const RunConfig& cfg, const std::string& what) {
  const auto list = cfg.list("emit");
  return std::find(list.begin(), list.end(), what) != list.end();
}

void write_config_if_emitting(const RunConfig& cfg, const std::filesystem::path& dir) {
  write_file(dir / "config.json", cfg.to_json().dump(2) + "\n");
}

unsigned jobs_of(const RunConfig& cfg) {
  const auto j = cfg.integer("jobs");
  if (j < 0) throw InputError("jobs must be non-negative", "jobs");
  return static_cast<unsigned>(j);
}

std::size_t positive_count(const RunConfig& cfg, const std::string& key) {
  const auto v = cfg.integer(key);
  if (v < 1) throw InputError(fmt::format("{} must be at least 1, got {}", key, v), key);
  return static_cast<std::size_t>(v);
}

int cmd_params(const RunConfig& cfg, std::ostream& out) {
  const auto delay = DelaySpec::parse(cfg.text("delay"), cfg.integer("pmf_cap"));
  const auto report = solve_thresholds(cfg.real("p"), delay, cfg.real("tol"));
  const auto j = io::threshold_json(report);
  out << j.dump(2) << '\n';
  if (emits(cfg, "json")) {
    const auto dir = prepare_out_dir(cfg);
    write_file(dir / "params.json", j.dump(2) + "\n");
    write_config_if_emitting(cfg, dir);
  }
  return kSuccess;
}

int cmd_bitcoin_analytic(const RunConfig& cfg, std::ostream& out) {
  const auto bp = BitcoinParams::from_protocol(cfg.real("p"), cfg.real("q"), cfg.real("rate_scale"));
  const auto start = parse_start_state(cfg.text("start"));
  const auto j = io::analytic_json(bp, start);
  out << j.dump(2) << '\n';
  if (emits(cfg, "json") || emits(cfg, "grid")) {
    const auto dir = prepare_out_dir(cfg);
    if (emits(cfg, "json")) write_file(dir / "analytic.json", j.dump(2) + "\n");
    if (emits(cfg, "grid")) {
      std::ostringstream os;
      io::write_transform_csv(os, bp, start, static_cast<int>(cfg.integer("grid_points")));
      write_file(dir / "transform.csv", os.str());
    }
    write_config_if_emitting(cfg, dir);
  }
  return kSuccess;
}

int cmd_bitcoin_sim(const RunConfig& cfg, std::ostream& out) {
  const auto bp = BitcoinParams::from_protocol(cfg.real("p"), cfg.real("q"), cfg.real("rate_scale"));
  bitcoin::EnsembleOptions eo;
  eo.n = positive_count(cfg, "samples");
  eo.master_seed = cfg.seed("master_seed");
  eo.jobs = jobs_of(cfg);
  eo.threshold_min = cfg.real("threshold_min");
  eo.start = parse_start_state(cfg.text("start"));
  if (cfg.text("stop") == "paper-proxy") {
    const auto blocks = cfg.integer("proxy_blocks");
    if (blocks < 1) throw InputError("proxy_blocks must be at least 1", "proxy_blocks");
    eo.stop = bitcoin::StopRule::paper_proxy(blocks);
  } else {
    const double eps = cfg.real("lead_eps");
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("lead_eps must lie in (0, 1)", "lead_eps");
    eo.stop = bitcoin::StopRule::lead_cap(eps);
  }
  const auto summary = bitcoin::run_ensemble(bp, eo);
  const auto j = io::bitcoin_summary_json(bp, summary);
  out << j.dump(2) << '\n';
  if (emits(cfg, "csv") || emits(cfg, "json") || emits(cfg, "tail")) {
    const auto dir = prepare_out_dir(cfg);
    if (emits(cfg, "csv")) {
      std::ostringstream os;
      io::write_samples_csv(os, summary);
      write_file(dir / "samples.csv", os.str());
    }
    if (emits(cfg, "json")) write_file(dir / "summary.json", j.dump(2) + "\n");
    if (emits(cfg, "tail")) {
      const auto grid = bitcoin::default_tail_grid(
          summary, static_cast<std::size_t>(positive_count(cfg, "tail_points")));
      std::ostringstream os;
      io::write_tail_csv(os, bitcoin::empirical_tail(summary, grid));
      write_file(dir / "tail.csv", os.str());
    }
    write_config_if_emitting(cfg, dir);
  }
  return kSuccess;
}

int cmd_general_sim(const RunConfig& cfg, std::ostream& out) {
  const auto delay = DelaySpec::parse(cfg.text("delay"), cfg.integer("pmf_cap"));
  const auto report = solve_thresholds(cfg.real("p"), delay, cfg.real("tol"));
  general::LastPassageOptions lo;
  lo.n = positive_count(cfg, "samples");
  lo.master_seed = cfg.seed("master_seed");
  lo.jobs = jobs_of(cfg);
  const double eps = cfg.real("stop_eps");
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("stop_eps must lie in (0, 1)", "stop_eps");
  lo.stop.eps = eps;
  const auto boots = cfg.integer("bootstrap");
  if (boots < 0) throw InputError("bootstrap must be non-negative", "bootstrap");
  lo.bootstrap_resamples = static_cast<std::size_t>(boots);
  lo.keep_cycles = emits(cfg, "cycles");
  const auto summary = general::ensemble_last_passage(report, lo);
  const auto j = io::general_summary_json(report, summary, lo.n, lo.master_seed);
  out << j.dump(2) << '\n';
  if (emits(cfg, "csv") || emits(cfg, "json") || emits(cfg, "cycles")) {
    const auto dir = prepare_out_dir(cfg);
    if (emits(cfg, "csv")) {
      std::ostringstream os;
      io::write_t_cycles_csv(os, summary.t_values);
      write_file(dir / "t_cycles.csv", os.str());
    }
    if (emits(cfg, "json")) write_file(dir / "summary.json", j.dump(2) + "\n");
    if (emits(cfg, "cycles")) {
      std::ostringstream os;
      io::write_cycles_csv(os, summary);
      write_file(dir / "cycles.csv", os.str());
    }
    write_config_if_emitting(cfg, dir);
  }
  return kSuccess;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  validation::Options opt;
  opt.quick = cfg.flag("quick");
  opt.jobs = jobs_of(cfg);
  opt.master_seed = cfg.seed("master_seed");
  opt.z_star_factor = cfg.real("corrupt_z_star");
  const auto checks = validation::run_all(opt);
  out << validation::format_table(checks);
  std::size_t failed = 0;
  for (const auto& c : checks) failed += c.pass ? 0 : 1;
  if (failed > 0) {
    err << fmt::format("{} of {} checks failed:", failed, checks.size());
    for (const auto& c : checks) {
      if (!c.pass) err << ' ' << c.id;
    }
    err << '\n';
    return kFailure;
  }
  return kSuccess;
}

void report_error(std::ostream& err, bool json, const std::string& kind,
                  const std::string& message, const Json& extra = Json::object()) {
  if (json) {
    Json j = extra;
    j["error"] = kind;
    j["message"] = message;
    err << j.dump() << '\n';
  } else {
    err << "error: " << message;
    if (extra.contains("p_c") && message.find("p_c") == std::string::npos) {
      err << fmt::format(" (p_c = {:.9f})", extra["p_c"].get<double>());
    }
    err << '\n';
  }
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) { return parse_invocation(args).config; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const bool json = wants_json_errors(args);
  try {
    const auto inv = parse_invocation(args);
    const auto& cfg = inv.config;
    if (inv.dump_config) {
      out << cfg.to_json().dump(2) << '\n';
      return kSuccess;
    }
    const auto& sub = cfg.subcommand();
    if (sub == "params") return cmd_params(cfg, out);
    if (sub == "bitcoin-analytic") return cmd_bitcoin_analytic(cfg, out);
    if (sub == "bitcoin-sim") return cmd_bitcoin_sim(cfg, out);
    if (sub == "general-sim") return cmd_general_sim(cfg, out);
    if (sub == "validate") return cmd_validate(cfg, out, err);
    report_error(err, json, "usage", "unknown subcommand " + sub);
    return kUsage;
  } catch (const HelpRequest& h) {
    out << h.text;
    return kSuccess;
  } catch (const PreconditionError& e) {
    report_error(err, json, "precondition", e.what(), Json{{"p_c", e.p_critical()}});
    return kPrecondition;
  } catch (const InputError& e) {
    Json extra = Json::object();
    if (!e.key().empty()) extra["key"] = e.key();
    report_error(err, json, "usage", e.what(), extra);
    return kUsage;
  } catch (const DomainError& e) {
    report_error(err, json, "usage", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    report_error(err, json, "runtime", e.what());
    return kFailure;
  }
}

}  // namespace cclock::cli
