#pragma once

#include "json.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nsasym {

using Json = nlohmann::ordered_json;

/// One checked property: {name, value, bound, pass}. The bound is an object
/// with "min" and/or "max" (inclusive) or "equals".
struct Invariant {
  std::string name;
  Json value;
  Json bound;
  bool pass = false;
};

/// Invariants and recorded constants of one module.
class Section {
 public:
  explicit Section(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  /// value <= max; NaN fails.
  bool check_max(const std::string& name, double value, double max);
  /// value >= min; NaN fails.
  bool check_min(const std::string& name, double value, double min);
  bool check_range(const std::string& name, double value, double min, double max);
  bool check_true(const std::string& name, bool value);
  void add(Invariant inv);

  /// Recorded constant (not checked).
  void record(const std::string& key, Json value) { constants_[key] = std::move(value); }

  const std::vector<Invariant>& invariants() const { return invariants_; }
  const Json& constants() const { return constants_; }
  Json to_json() const;

 private:
  std::string name_;
  std::vector<Invariant> invariants_;
  Json constants_ = Json::object();
};

/// Report of one CLI run. Invariant names are unique within a section.
class Report {
 public:
  Section& section(const std::string& name);
  const std::vector<Section>& sections() const { return sections_; }

  void set_meta(const std::string& key, Json value) { meta_[key] = std::move(value); }

  std::vector<std::string> failures() const;  ///< "section/name"
  std::size_t invariant_count() const;

  /// The full report; the "timestamp" member is the only run-dependent field.
  Json to_json(const std::string& timestamp) const;
  /// Writes to_json(...) with 2-space indentation and a trailing newline.
  void write(const std::string& path, const std::string& timestamp) const;

 private:
  Json meta_ = Json::object();
  std::vector<Section> sections_;
};

/// ISO 8601 UTC time of the call.
std::string utc_timestamp();

/// Numeric CSV with `# key = value` metadata lines before the header.
/// Values are written in scientific notation with 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
  void meta(const std::string& key, double value);
  void row(const std::vector<double>& values);

  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::vector<double>> rows_;
};

/// "%.16e" formatting.
std::string format_sci(double v);

}  // namespace nsasym
