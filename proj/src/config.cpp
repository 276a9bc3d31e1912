#include "nsasym/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nsasym {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

const char* type_name(ParamType t) {
  switch (t) {
    case ParamType::real: return "a number";
    case ParamType::integer: return "an integer";
    case ParamType::choice: return "one of the listed choices";
    case ParamType::real_list: return "a comma-separated list of numbers";
    case ParamType::text: return "text";
  }
  return "a value";
}

void check_value(const ParamSpec& s, const std::string& v) {
  switch (s.type) {
    case ParamType::real: parse_real(s.name, v); break;
    case ParamType::integer: parse_integer(s.name, v); break;
    case ParamType::real_list: parse_real_list(s.name, v); break;
    case ParamType::choice:
      if (std::find(s.choices.begin(), s.choices.end(), v) == s.choices.end()) {
        std::string list;
        for (const auto& c : s.choices) list += (list.empty() ? "" : ", ") + c;
        throw ConfigError(s.name, "invalid value '" + v + "' for key '" + s.name + "': expected one of " + list);
      }
      break;
    case ParamType::text: break;
  }
}

}  // namespace

double parse_real(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key, "invalid value '" + value + "' for key '" + key + "': expected a number");
  return out;
}

std::int64_t parse_integer(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key, "invalid value '" + value + "' for key '" + key + "': expected an integer");
  return out;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_real(key, item));
    } catch (const ConfigError&) {
      throw ConfigError(key, "invalid value '" + value + "' for key '" + key +
                                 "': expected a comma-separated list of numbers");
    }
  }
  if (out.empty()) throw ConfigError(key, "empty list for key '" + key + "'");
  return out;
}

std::string valid_keys(const std::vector<ParamSpec>& specs) {
  std::vector<std::string> names;
  for (const auto& s : specs) names.push_back(s.name);
  std::sort(names.begin(), names.end());
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError("", where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("", where + ": missing key");
    if (out.count(key)) throw ConfigError(key, where + ": key '" + key + "' repeated");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

Params resolve_params(const std::vector<ParamSpec>& specs, const std::map<std::string, std::string>& file_values,
                      const std::map<std::string, std::string>& flag_values) {
  std::map<std::string, std::string> values;
  for (const auto& s : specs) values[s.name] = s.default_value;
  for (const auto* src : {&file_values, &flag_values}) {
    for (const auto& [k, v] : *src) {
      if (!values.count(k)) throw ConfigError(k, "unknown key '" + k + "'; valid keys: " + valid_keys(specs));
      values[k] = v;
    }
  }
  for (const auto& s : specs) check_value(s, values[s.name]);
  return Params(specs, std::move(values));
}

Params::Params(std::vector<ParamSpec> specs, std::map<std::string, std::string> values)
    : specs_(std::move(specs)), values_(std::move(values)) {}

const ParamSpec& Params::spec(const std::string& key) const {
  for (const auto& s : specs_)
    if (s.name == key) return s;
  throw ConfigError(key, "unknown key '" + key + "'; valid keys: " + valid_keys(specs_));
}

double Params::real(const std::string& key) const {
  const ParamSpec& s = spec(key);
  if (s.type != ParamType::real) throw ConfigError(key, "key '" + key + "' is " + type_name(s.type));
  return parse_real(key, values_.at(key));
}

std::int64_t Params::integer(const std::string& key) const {
  const ParamSpec& s = spec(key);
  if (s.type != ParamType::integer) throw ConfigError(key, "key '" + key + "' is " + type_name(s.type));
  return parse_integer(key, values_.at(key));
}

const std::string& Params::text(const std::string& key) const {
  const ParamSpec& s = spec(key);
  if (s.type != ParamType::text && s.type != ParamType::choice)
    throw ConfigError(key, "key '" + key + "' is " + type_name(s.type));
  return values_.at(key);
}

std::vector<double> Params::real_list(const std::string& key) const {
  const ParamSpec& s = spec(key);
  if (s.type != ParamType::real_list) throw ConfigError(key, "key '" + key + "' is " + type_name(s.type));
  return parse_real_list(key, values_.at(key));
}

}  // namespace nsasym
