#pragma once

// Carbon-intensity CSV ingestion and seeded scenario generation.
//
// Random stream: std::mt19937_64 seeded with the 64-bit seed. Integers are
// drawn uniformly by rejection sampling on raw 64-bit outputs, and a
// Bernoulli(p) draw compares (raw >> 11) * 2^-53 against p. Renewable draws
// come first, row-major over (site, slot) and only for daytime slots, then
// (origin, deadline, home site) per task. No <random> distribution objects
// are used, so streams match across standard libraries.

#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "carbonflow/model.hpp"

namespace carbonflow {

struct CiTable {
  std::vector<std::string> regions;
  std::vector<std::vector<double>> series;  // per region, slot 1..T

  [[nodiscard]] int num_slots() const {
    return series.empty() ? 0 : static_cast<int>(series.front().size());
  }
  [[nodiscard]] double at(const std::string& region, int slot) const {
    for (std::size_t r = 0; r < regions.size(); ++r)
      if (regions[r] == region) return series[r].at(slot - 1);
    throw std::out_of_range("unknown region " + region);
  }
};

class CiParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

// Rows `region,slot,ci_g_per_kwh`; '#' lines are comments. Regions keep the
// order of their first appearance; each must cover slots 1..T exactly once.
inline CiTable parse_ci_csv(std::istream& in, const std::string& source = "<input>") {
  auto fail = [&source](int line, const std::string& what) -> CiParseError {
    return CiParseError(source + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<std::string> regions;
  std::vector<std::map<int, double>> values;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = detail::trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto cells = detail::split_csv(text);
    if (!header_seen) {
      if (cells != std::vector<std::string>{"region", "slot", "ci_g_per_kwh"})
        throw fail(line_no, "expected header 'region,slot,ci_g_per_kwh'");
      header_seen = true;
      continue;
    }
    if (cells.size() != 3 || cells[0].empty()) throw fail(line_no, "malformed row '" + text + "'");
    int slot = 0;
    double ci = 0.0;
    try {
      std::size_t used = 0;
      slot = std::stoi(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("slot");
      ci = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("ci");
    } catch (const std::exception&) {
      throw fail(line_no, "malformed row '" + text + "'");
    }
    if (slot < 1) throw fail(line_no, "slot must be >= 1");
    if (!(ci >= 0.0)) throw fail(line_no, "negative carbon intensity");
    std::size_t r = 0;
    while (r < regions.size() && regions[r] != cells[0]) ++r;
    if (r == regions.size()) {
      regions.push_back(cells[0]);
      values.emplace_back();
    }
    if (!values[r].emplace(slot, ci).second)
      throw fail(line_no, "duplicate slot " + std::to_string(slot) + " for " + cells[0]);
  }
  if (regions.empty()) throw CiParseError(source + ": no data rows");

  CiTable table;
  table.regions = regions;
  const std::size_t T = values.front().size();
  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (values[r].size() != T || values[r].rbegin()->first != static_cast<int>(T))
      throw CiParseError(source + ": region " + regions[r] + " is missing slots (expected 1.." +
                         std::to_string(T) + ")");
    std::vector<double> series;
    for (const auto& [slot, ci] : values[r]) series.push_back(ci);
    table.series.push_back(std::move(series));
  }
  return table;
}

inline CiTable load_ci_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CI file '" + path + "'");
  return parse_ci_csv(in, path);
}

class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [lo, hi].
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return lo + static_cast<std::int64_t>(engine_());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                (std::numeric_limits<std::uint64_t>::max() % range + 1) % range;
    std::uint64_t r = engine_();
    while (r > limit) r = engine_();
    return lo + static_cast<std::int64_t>(r % range);
  }

  // Uniform on [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * unit(); }

  bool bernoulli(double p) { return unit() < p; }

  std::int64_t binomial(int trials, double p) {
    std::int64_t k = 0;
    for (int i = 0; i < trials; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

struct GenConfig {
  std::uint64_t seed = 1;
  int num_sites = 3;
  int num_slots = 24;
  int num_tasks = 100;
  // Slot t covers clock hours [t-1, t), so 7 am to 7 pm is slots 8..19.
  int day_start = 8;
  int day_end = 19;
  int trials = 5;
  double probability = 0.5;
  double alpha = 0.1;
  double beta = 0.2;
  Energy battery_cap = 10;
  Energy server_cap = 10;
};

inline std::vector<std::string> validate_config(const GenConfig& c) {
  std::vector<std::string> out;
  if (c.num_sites < 1) out.emplace_back("sites must be >= 1");
  if (c.num_slots < 1) out.emplace_back("slots must be >= 1");
  if (c.num_tasks < 0) out.emplace_back("tasks must be >= 0");
  if (c.trials < 0) out.emplace_back("binomial trials must be >= 0");
  if (!(c.probability >= 0.0 && c.probability <= 1.0))
    out.emplace_back("binomial probability must lie in [0, 1]");
  if (c.day_start < 1 || c.day_end > c.num_slots || c.day_start > c.day_end + 1)
    out.emplace_back("daytime window must lie within [1, slots]");
  if (c.alpha < 0.0 || c.beta < 0.0) out.emplace_back("alpha and beta must be >= 0");
  if (c.battery_cap < 0 || c.server_cap < 0) out.emplace_back("capacities must be >= 0");
  return out;
}

// Site s uses the s-th region of `ci`.
inline Scenario generate_scenario(const GenConfig& c, const CiTable& ci) {
  if (auto errs = validate_config(c); !errs.empty()) {
    std::string msg = "invalid generator config:";
    for (const auto& e : errs) msg += " " + e + ";";
    throw std::invalid_argument(msg);
  }
  if (static_cast<int>(ci.regions.size()) < c.num_sites)
    throw std::invalid_argument("CI table has " + std::to_string(ci.regions.size()) +
                                " regions, need " + std::to_string(c.num_sites));
  if (ci.num_slots() < c.num_slots)
    throw std::invalid_argument("CI table has " + std::to_string(ci.num_slots()) +
                                " slots, need " + std::to_string(c.num_slots));

  Scenario sc = Scenario::zeros(c.num_sites, c.num_slots);
  for (int s = 0; s < c.num_sites; ++s)
    for (int t = 0; t < c.num_slots; ++t) sc.ci(s, t) = ci.series[s][t];
  sc.alpha = broadcast_off_diagonal(c.num_sites, c.alpha);
  sc.beta = broadcast_off_diagonal(c.num_sites, c.beta);
  sc.battery_cap = c.battery_cap;
  sc.server_cap = c.server_cap;

  SeededStream rng(c.seed);
  for (int s = 0; s < c.num_sites; ++s) {
    for (int t = 0; t < c.num_slots; ++t) {
      const int slot = t + 1;
      if (slot >= c.day_start && slot <= c.day_end)
        sc.renewable(s, t) = rng.binomial(c.trials, c.probability);
    }
  }
  std::vector<int> all_sites(c.num_sites);
  for (int s = 0; s < c.num_sites; ++s) all_sites[s] = s;
  for (int n = 0; n < c.num_tasks; ++n) {
    Task task;
    task.id = n;
    task.origin_slot = static_cast<int>(rng.uniform(1, c.num_slots)) - 1;
    task.deadline_slot = static_cast<int>(rng.uniform(task.origin_slot + 1, c.num_slots)) - 1;
    task.home_site = static_cast<int>(rng.uniform(1, c.num_sites)) - 1;
    task.candidates = all_sites;
    sc.tasks.push_back(std::move(task));
  }
  return sc;
}

}  // namespace carbonflow
