#pragma once

// Brute-force optimum of the integer program for desk-sized instances.
//
// Every complete task placement is enumerated explicitly. With the placement
// fixed, what remains is a pure energy-routing problem (grid, renewables,
// batteries, sharing) whose demand sits directly on the servers, so it is
// solved as a min-cost flow without any task nodes. The placement's
// offloading cost is added on top.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "carbonflow/datagen.hpp"
#include "carbonflow/mcf.hpp"
#include "carbonflow/model.hpp"
#include "carbonflow/reformulate.hpp"

namespace carbonflow {

struct AssignmentEnumeration {
  std::vector<std::vector<Placement>> options;  // per task, (site, slot) lexicographic

  [[nodiscard]] double size() const {
    double total = 1.0;
    for (const auto& o : options) total *= static_cast<double>(o.size());
    return total;
  }
};

inline AssignmentEnumeration enumerate_placements(const Scenario& sc, Scheme scheme) {
  AssignmentEnumeration en;
  for (const Task& task : sc.tasks) {
    std::vector<Placement> opts;
    const std::vector<int> sites =
        scheme.offloading ? task.candidates : std::vector<int>{task.home_site};
    for (int s : sites)
      for (int t = task.origin_slot; t <= task.deadline_slot; ++t) opts.push_back({s, t});
    en.options.push_back(std::move(opts));
  }
  return en;
}

struct OracleResult {
  bool feasible = false;
  double total = std::numeric_limits<double>::infinity();
  std::vector<Placement> best;
  SolutionVars vars;  // best placement with its optimal energy plan
  std::uint64_t evaluated = 0;
};

struct EnergyPlan {
  double cost = 0.0;
  SolutionVars vars;  // assignment left empty
};

// Cheapest way to deliver `load(s, t)` energy units to each server, or
// nullopt when the energy cannot be routed.
inline std::optional<EnergyPlan> energy_plan(const Scenario& sc, Scheme scheme,
                                             const Matrix<Energy>& load) {
  const int S = sc.num_sites;
  const int T = sc.num_slots;
  Energy demand = 0;
  for (Energy l : load.values()) demand += l;
  Energy renewable_total = 0;
  for (Energy r : sc.renewable.values()) renewable_total += r;
  Energy initial_total = 0;
  for (Energy e : sc.initial_battery) initial_total += e;

  FlowNetwork net;
  const int grid = net.add_node(demand);
  const int sink = net.add_node(-(renewable_total + initial_total));
  Matrix<int> source(S, T), charge(S, T), discharge(S, T), server(S, T);
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < T; ++t) {
      source(s, t) = net.add_node(sc.renewable(s, t));
      charge(s, t) = net.add_node(t == 0 ? sc.initial_battery[s] : 0);
      discharge(s, t) = net.add_node();
      server(s, t) = net.add_node(-load(s, t));
    }
  }
  constexpr FlowUnits kOpen = FlowNetwork::kUnbounded;
  Matrix<int> x(S, T, -1), z(S, T, -1), u(S, T, -1), v(S, T, -1), w(S, T, -1);
  Tensor3<int> y(S, S, T, -1);
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < T; ++t) {
      const double ci = sc.ci(s, t);
      z(s, t) = net.add_arc(source(s, t), server(s, t), kOpen, 0.0);
      v(s, t) = net.add_arc(source(s, t), charge(s, t), kOpen, 0.0);
      net.add_arc(source(s, t), sink, kOpen, 0.0);
      x(s, t) = net.add_arc(grid, server(s, t), kOpen, ci);
      u(s, t) = net.add_arc(grid, charge(s, t), kOpen, ci);
      net.add_arc(charge(s, t), discharge(s, t), sc.battery_cap, 0.0);
      for (int s2 = 0; s2 < S; ++s2)
        if (scheme.sharing || s2 == s)
          y(s, s2, t) = net.add_arc(discharge(s2, t), server(s, t), kOpen, sc.beta(s2, s) * ci);
      if (t + 1 < T) w(s, t) = net.add_arc(discharge(s, t), charge(s, t + 1), kOpen, 0.0);
    }
  }
  net.add_arc(grid, sink, kOpen, 0.0);

  FlowSolution sol;
  try {
    sol = solve_min_cost_flow(net);
  } catch (const InfeasibleFlow&) {
    return std::nullopt;
  }
  EnergyPlan plan;
  plan.cost = sol.objective;
  plan.vars = SolutionVars::zeros(sc);
  auto f = [&sol](int arc) { return arc < 0 ? 0.0 : static_cast<double>(sol.flow[arc]); };
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < T; ++t) {
      plan.vars.x(s, t) = f(x(s, t));
      plan.vars.z(s, t) = f(z(s, t));
      plan.vars.u(s, t) = f(u(s, t));
      plan.vars.v(s, t) = f(v(s, t));
      plan.vars.w(s, t) = f(w(s, t));
      for (int s2 = 0; s2 < S; ++s2) plan.vars.y(s, s2, t) = f(y(s, s2, t));
    }
  }
  return plan;
}

inline constexpr std::uint64_t kDefaultEnumerationLimit = 1'000'000;

inline OracleResult brute_force_optimum(const Scenario& sc, Scheme scheme,
                                        std::uint64_t limit = kDefaultEnumerationLimit,
                                        OffloadCi mode = OffloadCi::kDestination) {
  if (auto rep = validate_scenario(sc); !rep.ok()) throw InvalidScenario(rep);
  const AssignmentEnumeration en = enumerate_placements(sc, scheme);
  if (en.size() > static_cast<double>(limit))
    throw std::length_error("enumeration of " + std::to_string(en.size()) +
                            " placements exceeds the limit of " + std::to_string(limit) +
                            "; shrink the instance");

  OracleResult res;
  const int N = sc.num_tasks();
  if (N == 0) {
    res.evaluated = 1;
    auto plan = energy_plan(sc, scheme, Matrix<Energy>(sc.num_sites, sc.num_slots, 0));
    if (!plan) return res;
    res.feasible = true;
    res.total = plan->cost;
    res.vars = std::move(plan->vars);
    return res;
  }

  std::map<std::vector<Energy>, std::optional<EnergyPlan>> cache;
  std::vector<std::size_t> cursor(N, 0);
  Matrix<Energy> load(sc.num_sites, sc.num_slots, 0);
  std::vector<Placement> current(N);
  while (true) {
    ++res.evaluated;
    std::fill(load.values().begin(), load.values().end(), 0);
    bool over_capacity = false;
    double offload = 0.0;
    for (int n = 0; n < N; ++n) {
      const Placement p = en.options[n][cursor[n]];
      current[n] = p;
      if (++load(p.site, p.slot) > sc.server_cap) over_capacity = true;
      offload += offload_cost(sc, sc.tasks[n], p.site, p.slot, mode);
    }
    if (!over_capacity) {
      const std::vector<Energy> key(load.values().begin(), load.values().end());
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, energy_plan(sc, scheme, load)).first;
      if (it->second) {
        const double total = it->second->cost + offload;
        if (!res.feasible || total < res.total) {
          res.feasible = true;
          res.total = total;
          res.best = current;
          res.vars = it->second->vars;
        }
      }
    }

    int n = N - 1;
    while (n >= 0 && ++cursor[n] == en.options[n].size()) cursor[n--] = 0;
    if (n < 0) break;
  }
  if (res.feasible) res.vars.assignment = res.best;
  return res;
}

// Small random instance for cross-checking the flow model against the
// oracle: 2 sites, 3 slots, up to 4 tasks with random candidate subsets.
inline Scenario make_oracle_instance(std::uint64_t seed) {
  constexpr int kSites = 2;
  constexpr int kSlots = 3;
  SeededStream rng(seed);
  Scenario sc = Scenario::zeros(kSites, kSlots);
  for (int s = 0; s < kSites; ++s) {
    for (int t = 0; t < kSlots; ++t) {
      sc.ci(s, t) = rng.uniform_real(10.0, 600.0);
      sc.renewable(s, t) = rng.uniform(0, 2);
    }
  }
  sc.alpha = broadcast_off_diagonal(kSites, rng.uniform_real(0.0, 0.5));
  sc.beta = broadcast_off_diagonal(kSites, rng.uniform_real(0.0, 0.5));
  sc.battery_cap = rng.uniform(0, 2);
  sc.server_cap = rng.uniform(1, 2);
  const int tasks = static_cast<int>(rng.uniform(0, 4));
  for (int n = 0; n < tasks; ++n) {
    Task task;
    task.id = n;
    task.origin_slot = static_cast<int>(rng.uniform(0, kSlots - 1));
    task.deadline_slot = static_cast<int>(rng.uniform(task.origin_slot, kSlots - 1));
    task.home_site = static_cast<int>(rng.uniform(0, kSites - 1));
    const auto mask = rng.uniform(1, (1 << kSites) - 1);
    for (int s = 0; s < kSites; ++s)
      if (mask & (1 << s)) task.candidates.push_back(s);
    sc.tasks.push_back(std::move(task));
  }
  return sc;
}

struct OracleMismatch {
  std::uint64_t seed = 0;
  Scheme scheme;
  std::string detail;
};

struct OracleCheckSummary {
  int instances = 0;
  int comparisons = 0;
  int infeasible = 0;
  std::vector<OracleMismatch> mismatches;
};

// Compares solve_scheme against brute_force_optimum on `count` random
// instances (seeds first_seed, first_seed + 1, ...) under all four schemes.
inline OracleCheckSummary run_oracle_check(int count, std::uint64_t first_seed,
                                           OffloadCi mode = OffloadCi::kDestination,
                                           double rel_tol = 1e-9) {
  OracleCheckSummary sum;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(i);
    const Scenario sc = make_oracle_instance(seed);
    ++sum.instances;
    for (Scheme scheme : kAllSchemes) {
      ++sum.comparisons;
      const OracleResult oracle = brute_force_optimum(sc, scheme, kDefaultEnumerationLimit, mode);
      std::optional<double> flow_total;
      try {
        flow_total = solve_scheme(sc, scheme, {mode}).breakdown.total();
      } catch (const InfeasibleScenario&) {
      }
      if (!oracle.feasible) ++sum.infeasible;
      if (oracle.feasible != flow_total.has_value()) {
        sum.mismatches.push_back({seed, scheme, "feasibility verdicts differ"});
        continue;
      }
      if (!oracle.feasible) continue;
      const double diff = std::abs(*flow_total - oracle.total);
      if (diff > rel_tol * std::max(1.0, std::abs(oracle.total))) {
        sum.mismatches.push_back({seed, scheme,
                                  "flow " + std::to_string(*flow_total) + " vs oracle " +
                                      std::to_string(oracle.total)});
      }
    }
  }
  return sum;
}

}  // namespace carbonflow
