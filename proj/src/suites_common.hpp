#pragma once

#include "nsasym/report.hpp"
#include "nsasym/suites.hpp"
#include "nsasym/types.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace nsasym::detail {

/// Wall time of a block, stored under `key` when the timer is destroyed.
class ScopedTimer {
 public:
  ScopedTimer(const SuiteContext& ctx, std::string key)
      : ctx_(ctx), key_(std::move(key)), start_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start_;
    ctx_.record_time(key_, d.count());
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  const SuiteContext& ctx_;
  std::string key_;
  std::chrono::steady_clock::time_point start_;
};

/// Uniform direction.
inline Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(N(rng), N(rng), N(rng));
  } while (v.norm() < 1e-8);
  return v.normalized();
}

/// Point with |x| log-uniform in [r_lo, r_hi].
inline Vec3 random_point(std::mt19937_64& rng, double r_lo, double r_hi) {
  std::uniform_real_distribution<double> U(std::log(r_lo), std::log(r_hi));
  const Vec3 d = random_direction(rng);
  return std::exp(U(rng)) * d;
}

inline std::vector<double> log_space(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo * std::pow(hi / lo, double(i) / (n - 1)));
  return out;
}

inline Json vec_json(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

/// [lo, hi] against an inclusive window.
inline bool check_span(Section& s, const std::string& name, double lo, double hi, double min, double max) {
  const bool pass = lo >= min && hi <= max;
  s.add({name, Json::array({lo, hi}), Json{{"min", min}, {"max", max}}, pass});
  return pass;
}

}  // namespace nsasym::detail
