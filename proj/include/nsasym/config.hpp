#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsasym {

/// Invalid experiment configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error(message), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class ParamType { real, integer, choice, real_list, text };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::real;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;  ///< for ParamType::choice
};

/// Typed flat parameter map.
class Params {
 public:
  Params() = default;
  Params(std::vector<ParamSpec> specs, std::map<std::string, std::string> values);

  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::vector<ParamSpec>& specs() const { return specs_; }
  /// Raw values in key order.
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  const ParamSpec& spec(const std::string& key) const;
  std::vector<ParamSpec> specs_;
  std::map<std::string, std::string> values_;
};

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError on
/// malformed lines and repeated keys.
std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& origin = "config");
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Merges file values and flag values (flags win) over the defaults.
/// Unknown keys are rejected with the list of valid keys; every value is
/// converted once so a type mismatch names its key.
Params resolve_params(const std::vector<ParamSpec>& specs, const std::map<std::string, std::string>& file_values,
                      const std::map<std::string, std::string>& flag_values);

/// Conversions used by resolve_params; throw ConfigError naming `key`.
double parse_real(const std::string& key, const std::string& value);
std::int64_t parse_integer(const std::string& key, const std::string& value);
std::vector<double> parse_real_list(const std::string& key, const std::string& value);

std::string valid_keys(const std::vector<ParamSpec>& specs);

}  // namespace nsasym
