#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace cclock::cli {

using Json = nlohmann::json;

enum class ValueType { real, integer, seed, text, list, flag };

/// One configurable key of a subcommand. `flag` is the command-line spelling.
struct KeySpec {
  std::string key;
  std::string flag;
  ValueType type;
  Json default_value;  // null: required
  std::string help;
  std::vector<std::string> choices;  // allowed values (text) or elements (list)
};

const std::vector<std::string>& subcommands();

/// Keys accepted by `subcommand`; throws InputError for an unknown subcommand.
const std::vector<KeySpec>& schema(const std::string& subcommand);

/// Converts command-line text to the JSON value of `spec`'s type.
Json parse_value(const KeySpec& spec, const std::string& text);

/// Fully resolved settings of one invocation.
class RunConfig {
 public:
  /// Validates keys and types against the subcommand schema and fills defaults.
  /// `j` must contain "subcommand". Unknown or ill-typed keys throw InputError naming the key.
  static RunConfig from_json(const Json& j);

  /// Canonical form: every key of the schema plus "subcommand", keys sorted.
  Json to_json() const;
  std::string canonical() const { return to_json().dump(); }

  const std::string& subcommand() const noexcept { return subcommand_; }
  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t seed(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;
  bool flag(const std::string& key) const;

  friend bool operator==(const RunConfig& l, const RunConfig& r) {
    return l.subcommand_ == r.subcommand_ && l.values_ == r.values_;
  }

 private:
  std::string subcommand_;
  Json values_;
};

}  // namespace cclock::cli
