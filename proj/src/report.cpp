#include "nsasym/report.hpp"

#include "nsasym/types.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace nsasym {

namespace {

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

void Section::add(Invariant inv) {
  for (const auto& i : invariants_)
    if (i.name == inv.name) throw std::logic_error("duplicate invariant '" + inv.name + "' in section " + name_);
  invariants_.push_back(std::move(inv));
}

bool Section::check_max(const std::string& name, double value, double max) {
  const bool pass = value <= max;
  add({name, number(value), Json{{"max", max}}, pass});
  return pass;
}

bool Section::check_min(const std::string& name, double value, double min) {
  const bool pass = value >= min;
  add({name, number(value), Json{{"min", min}}, pass});
  return pass;
}

bool Section::check_range(const std::string& name, double value, double min, double max) {
  const bool pass = value >= min && value <= max;
  add({name, number(value), Json{{"min", min}, {"max", max}}, pass});
  return pass;
}

bool Section::check_true(const std::string& name, bool value) {
  add({name, value, Json{{"equals", true}}, value});
  return value;
}

Json Section::to_json() const {
  Json inv = Json::array();
  for (const auto& i : invariants_)
    inv.push_back(Json{{"name", i.name}, {"value", i.value}, {"bound", i.bound}, {"pass", i.pass}});
  return Json{{"invariants", inv}, {"constants", constants_}};
}

Section& Report::section(const std::string& name) {
  for (auto& s : sections_)
    if (s.name() == name) return s;
  sections_.emplace_back(name);
  return sections_.back();
}

std::vector<std::string> Report::failures() const {
  std::vector<std::string> out;
  for (const auto& s : sections_)
    for (const auto& i : s.invariants())
      if (!i.pass) out.push_back(s.name() + "/" + i.name);
  return out;
}

std::size_t Report::invariant_count() const {
  std::size_t n = 0;
  for (const auto& s : sections_) n += s.invariants().size();
  return n;
}

Json Report::to_json(const std::string& timestamp) const {
  Json out = meta_;
  out["timestamp"] = timestamp;
  Json sections = Json::object();
  for (const auto& s : sections_) sections[s.name()] = s.to_json();
  out["sections"] = sections;
  const auto failed = failures();
  out["summary"] = Json{{"invariants", invariant_count()},
                        {"passed", invariant_count() - failed.size()},
                        {"failed", failed},
                        {"pass", failed.empty()}};
  return out;
}

void Report::write(const std::string& path, const std::string& timestamp) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(timestamp).dump(2) << '\n';
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

void CsvTable::meta(const std::string& key, double value) { meta(key, format_sci(value)); }

void CsvTable::row(const std::vector<double>& values) {
  if (values.size() != columns_.size())
    throw std::logic_error("CSV row has " + std::to_string(values.size()) + " values for " +
                           std::to_string(columns_.size()) + " columns");
  rows_.push_back(values);
}

std::string CsvTable::str() const {
  std::string out;
  for (const auto& [k, v] : meta_) out += "# " + k + " = " + v + "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
  out += "\n";
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_sci(r[i]);
    out += "\n";
  }
  return out;
}

void CsvTable::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << str();
}

}  // namespace nsasym
