#pragma once

// Capacity sweeps over schemes and seeds, emitted as a CSV table.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "carbonflow/model.hpp"
#include "carbonflow/reformulate.hpp"

namespace carbonflow {

enum class CapacityParam { kBattery, kServer };

inline CapacityParam parse_capacity_param(std::string_view text) {
  if (text == "battery_cap" || text == "L") return CapacityParam::kBattery;
  if (text == "server_cap" || text == "H") return CapacityParam::kServer;
  throw std::invalid_argument("unknown sweep parameter '" + std::string(text) + "'");
}

struct SweepSpec {
  CapacityParam parameter = CapacityParam::kBattery;
  std::vector<Energy> values;
  Energy fixed = 10;  // the other capacity
  std::vector<Scheme> schemes;
  std::vector<std::uint64_t> seeds;
};

inline std::vector<std::string> validate_sweep(const SweepSpec& spec) {
  std::vector<std::string> out;
  if (spec.values.empty()) out.emplace_back("sweep values are empty");
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    if (spec.values[i] < 0) out.emplace_back("sweep values must be non-negative");
    if (i > 0 && spec.values[i] <= spec.values[i - 1])
      out.emplace_back("sweep values must be strictly increasing");
  }
  if (spec.fixed < 0) out.emplace_back("fixed capacity must be non-negative");
  if (spec.schemes.empty()) out.emplace_back("no schemes selected");
  if (spec.seeds.empty()) out.emplace_back("no seeds selected");
  return out;
}

struct SweepRow {
  std::string seed;  // decimal seed or "mean"
  Scheme scheme;
  Energy battery_cap = 0;
  Energy server_cap = 0;
  bool feasible = true;
  CFBreakdown breakdown;
  double total = 0.0;
  double runtime_ms = 0.0;
};

struct SweepOptions {
  BuildOptions build;
  int jobs = 1;
};

using ScenarioFactory = std::function<Scenario(std::uint64_t seed)>;

// One row per (seed, scheme, value) in that nesting order, followed by the
// per-(scheme, value) means across seeds. An infeasible cell has total = inf.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const ScenarioFactory& make,
                                       const SweepOptions& opts = {}) {
  if (auto errs = validate_sweep(spec); !errs.empty()) throw std::invalid_argument(errs.front());

  std::vector<Scenario> bases;
  for (std::uint64_t seed : spec.seeds) bases.push_back(make(seed));

  const std::size_t per_seed = spec.schemes.size() * spec.values.size();
  std::vector<SweepRow> rows(spec.seeds.size() * per_seed);
  auto run_cell = [&](std::size_t i) {
    const std::size_t seed_ix = i / per_seed;
    const std::size_t scheme_ix = (i % per_seed) / spec.values.size();
    const std::size_t value_ix = i % spec.values.size();
    Scenario sc = bases[seed_ix];
    if (spec.parameter == CapacityParam::kBattery) {
      sc.battery_cap = spec.values[value_ix];
      sc.server_cap = spec.fixed;
    } else {
      sc.server_cap = spec.values[value_ix];
      sc.battery_cap = spec.fixed;
    }
    std::fill(sc.initial_battery.begin(), sc.initial_battery.end(), 0);
    SweepRow& row = rows[i];
    row.seed = std::to_string(spec.seeds[seed_ix]);
    row.scheme = spec.schemes[scheme_ix];
    row.battery_cap = sc.battery_cap;
    row.server_cap = sc.server_cap;
    try {
      const SchemeResult res = solve_scheme(sc, row.scheme, opts.build);
      row.breakdown = res.breakdown;
      row.total = res.breakdown.total();
      row.runtime_ms = res.runtime_ms;
    } catch (const InfeasibleScenario&) {
      row.feasible = false;
      row.total = std::numeric_limits<double>::infinity();
    }
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) run_cell(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  const double n = static_cast<double>(spec.seeds.size());
  for (std::size_t k = 0; k < spec.schemes.size(); ++k) {
    for (std::size_t v = 0; v < spec.values.size(); ++v) {
      SweepRow mean;
      mean.seed = "mean";
      mean.scheme = spec.schemes[k];
      for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
        const SweepRow& r = rows[s * per_seed + k * spec.values.size() + v];
        mean.battery_cap = r.battery_cap;
        mean.server_cap = r.server_cap;
        mean.feasible &= r.feasible;
        mean.breakdown.grid += r.breakdown.grid / n;
        mean.breakdown.battery += r.breakdown.battery / n;
        mean.breakdown.offload += r.breakdown.offload / n;
        mean.breakdown.loss += r.breakdown.loss / n;
        mean.total += r.total / n;
        mean.runtime_ms += r.runtime_ms / n;
      }
      rows.push_back(mean);
    }
  }
  return rows;
}

namespace detail {

inline std::string format_value(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

// With `timing` off the runtime column holds "NA" so repeated runs are
// byte-identical.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool timing) {
  using detail::format_value;
  os << "seed,scheme,L,H,cf_total,cf_grid,cf_battery,cf_offload,cf_loss,runtime_ms\n";
  for (const SweepRow& r : rows) {
    const bool ok = r.feasible;
    const double inf = std::numeric_limits<double>::infinity();
    os << r.seed << ',' << r.scheme.name() << ',' << r.battery_cap << ',' << r.server_cap << ','
       << format_value(r.total) << ',' << format_value(ok ? r.breakdown.grid : inf) << ','
       << format_value(ok ? r.breakdown.battery : inf) << ','
       << format_value(ok ? r.breakdown.offload : inf) << ','
       << format_value(ok ? r.breakdown.loss : inf) << ','
       << (timing ? format_value(r.runtime_ms) : std::string("NA")) << '\n';
  }
}

}  // namespace carbonflow
