#pragma once

// Time-expanded flow network for joint task placement and battery
// charging/sharing, plus the mapping between arc flows and decision
// variables.
//
// Nodes: a merged grid source, a surplus sink, per (site, slot) a renewable
// source, a battery in/out pair and a server in/out pair, and one unit-demand
// node per task. Arc costs carry the carbon accounting, so the min-cost flow
// objective equals the total carbon footprint.

#include <algorithm>
#include <chrono>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "carbonflow/matrix.hpp"
#include "carbonflow/mcf.hpp"
#include "carbonflow/model.hpp"

namespace carbonflow {

struct Scheme {
  bool offloading = true;
  bool sharing = true;

  static constexpr Scheme s1() { return {true, true}; }
  static constexpr Scheme s2() { return {true, false}; }
  static constexpr Scheme s3() { return {false, true}; }
  static constexpr Scheme s4() { return {false, false}; }

  [[nodiscard]] std::string name() const {
    if (offloading) return sharing ? "S1" : "S2";
    return sharing ? "S3" : "S4";
  }

  static Scheme parse(std::string_view text) {
    if (text == "s1" || text == "S1") return s1();
    if (text == "s2" || text == "S2") return s2();
    if (text == "s3" || text == "S3") return s3();
    if (text == "s4" || text == "S4") return s4();
    throw std::invalid_argument("unknown scheme '" + std::string(text) + "' (expected s1..s4)");
  }

  bool operator==(const Scheme&) const = default;
};

inline constexpr Scheme kAllSchemes[] = {Scheme::s1(), Scheme::s2(), Scheme::s3(), Scheme::s4()};

// Which grid's intensity prices the energy spent moving a task.
enum class OffloadCi { kDestination, kOrigin };

inline OffloadCi parse_offload_ci(std::string_view text) {
  if (text == "destination") return OffloadCi::kDestination;
  if (text == "origin") return OffloadCi::kOrigin;
  throw std::invalid_argument("unknown offload-ci '" + std::string(text) + "'");
}

inline const char* to_string(OffloadCi mode) {
  return mode == OffloadCi::kDestination ? "destination" : "origin";
}

inline double offload_cost(const Scenario& sc, const Task& task, int site, int slot,
                           OffloadCi mode) {
  const int priced_site = mode == OffloadCi::kDestination ? site : task.home_site;
  return sc.alpha(task.home_site, site) * sc.ci(priced_site, slot);
}

// Sites a task may run on under `scheme`.
inline std::vector<int> allowed_sites(const Task& task, Scheme scheme) {
  if (!scheme.offloading) return {task.home_site};
  return task.candidates;
}

struct TaskArc {
  int site = 0;
  int slot = 0;
  int arc = 0;
};

struct GraphIndex {
  int grid = 0;
  int surplus = 0;
  Matrix<int> renewable_node;
  Matrix<int> battery_in;
  Matrix<int> battery_out;
  Matrix<int> server_in;
  Matrix<int> server_out;
  std::vector<int> task_node;

  Matrix<int> grid_to_server;        // x
  Matrix<int> grid_to_battery;       // u
  Matrix<int> renewable_to_server;   // z
  Matrix<int> renewable_to_battery;  // v
  Matrix<int> renewable_surplus;
  Matrix<int> battery_arc;           // capacity L
  Matrix<int> server_arc;            // capacity H
  Tensor3<int> share;                // (server s, battery s2, t) -> y; -1 when absent
  Matrix<int> carry;                 // (s, t) -> w, -1 for the last slot
  int grid_surplus = 0;
  std::vector<std::vector<TaskArc>> task_arcs;  // pi
};

struct BuildOptions {
  OffloadCi offload_ci = OffloadCi::kDestination;
};

struct BuiltGraph {
  FlowNetwork network;
  GraphIndex index;
};

inline BuiltGraph build_graph(const Scenario& sc, Scheme scheme, BuildOptions opts = {}) {
  if (auto rep = validate_scenario(sc); !rep.ok()) throw InvalidScenario(rep);

  const int S = sc.num_sites;
  const int T = sc.num_slots;
  const int N = sc.num_tasks();
  BuiltGraph out;
  FlowNetwork& net = out.network;
  GraphIndex& ix = out.index;

  Energy renewable_total = 0;
  for (Energy r : sc.renewable.values()) renewable_total += r;
  Energy initial_total = 0;
  for (Energy e : sc.initial_battery) initial_total += e;

  ix.grid = net.add_node(N);
  ix.surplus = net.add_node(-(renewable_total + initial_total));
  ix.renewable_node = ix.battery_in = ix.battery_out = ix.server_in = ix.server_out =
      Matrix<int>(S, T, -1);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      ix.renewable_node(s, t) = net.add_node(sc.renewable(s, t));
      ix.battery_in(s, t) = net.add_node(t == 0 ? sc.initial_battery[s] : 0);
      ix.battery_out(s, t) = net.add_node();
      ix.server_in(s, t) = net.add_node();
      ix.server_out(s, t) = net.add_node();
    }
  }
  for (int n = 0; n < N; ++n) ix.task_node.push_back(net.add_node(-1));

  constexpr FlowUnits kOpen = FlowNetwork::kUnbounded;
  ix.grid_to_server = ix.grid_to_battery = ix.renewable_to_server = ix.renewable_to_battery =
      ix.renewable_surplus = ix.battery_arc = ix.server_arc = ix.carry = Matrix<int>(S, T, -1);
  ix.share = Tensor3<int>(S, S, T, -1);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const double ci = sc.ci(s, t);
      const int theta = ix.renewable_node(s, t);
      ix.renewable_to_server(s, t) = net.add_arc(theta, ix.server_in(s, t), kOpen, 0.0);
      ix.renewable_to_battery(s, t) = net.add_arc(theta, ix.battery_in(s, t), kOpen, 0.0);
      ix.renewable_surplus(s, t) = net.add_arc(theta, ix.surplus, kOpen, 0.0);
      ix.grid_to_server(s, t) = net.add_arc(ix.grid, ix.server_in(s, t), kOpen, ci);
      ix.grid_to_battery(s, t) = net.add_arc(ix.grid, ix.battery_in(s, t), kOpen, ci);
      ix.battery_arc(s, t) =
          net.add_arc(ix.battery_in(s, t), ix.battery_out(s, t), sc.battery_cap, 0.0);
      for (int s2 = 0; s2 < S; ++s2) {
        if (!scheme.sharing && s2 != s) continue;
        ix.share(s, s2, t) =
            net.add_arc(ix.battery_out(s2, t), ix.server_in(s, t), kOpen, sc.beta(s2, s) * ci);
      }
      ix.server_arc(s, t) =
          net.add_arc(ix.server_in(s, t), ix.server_out(s, t), sc.server_cap, 0.0);
    }
  }
  for (int t = 0; t + 1 < T; ++t)
    for (int s = 0; s < S; ++s)
      ix.carry(s, t) = net.add_arc(ix.battery_out(s, t), ix.battery_in(s, t + 1), kOpen, 0.0);
  ix.grid_surplus = net.add_arc(ix.grid, ix.surplus, kOpen, 0.0);

  ix.task_arcs.resize(N);
  for (int n = 0; n < N; ++n) {
    const Task& task = sc.tasks[n];
    for (int s : allowed_sites(task, scheme)) {
      for (int t = task.origin_slot; t <= task.deadline_slot; ++t) {
        const int a = net.add_arc(ix.server_out(s, t), ix.task_node[n], 1,
                                  offload_cost(sc, task, s, t, opts.offload_ci));
        ix.task_arcs[n].push_back({s, t, a});
      }
    }
  }
  return out;
}

// Reads the decision variables back off an integral optimal flow.
inline SolutionVars extract_solution(const Scenario& sc, const GraphIndex& ix,
                                     const FlowSolution& flow) {
  const int S = sc.num_sites;
  const int T = sc.num_slots;
  SolutionVars vars = SolutionVars::zeros(sc);
  auto f = [&flow](int arc) { return arc < 0 ? 0.0 : static_cast<double>(flow.flow.at(arc)); };

  for (int n = 0; n < sc.num_tasks(); ++n) {
    int chosen = -1;
    for (std::size_t k = 0; k < ix.task_arcs[n].size(); ++k) {
      const FlowUnits units = flow.flow.at(ix.task_arcs[n][k].arc);
      if (units == 0) continue;
      if (units != 1 || chosen >= 0)
        throw std::logic_error("task " + std::to_string(n + 1) + " is split across placements");
      chosen = static_cast<int>(k);
    }
    if (chosen < 0) throw std::logic_error("task " + std::to_string(n + 1) + " is not served");
    vars.assignment[n] = {ix.task_arcs[n][chosen].site, ix.task_arcs[n][chosen].slot};
  }
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < T; ++t) {
      vars.x(s, t) = f(ix.grid_to_server(s, t));
      vars.u(s, t) = f(ix.grid_to_battery(s, t));
      vars.z(s, t) = f(ix.renewable_to_server(s, t));
      vars.v(s, t) = f(ix.renewable_to_battery(s, t));
      vars.w(s, t) = f(ix.carry(s, t));
      for (int s2 = 0; s2 < S; ++s2) vars.y(s, s2, t) = f(ix.share(s, s2, t));
    }
  }
  return vars;
}

inline CFBreakdown cf_breakdown(const Scenario& sc, const SolutionVars& vars,
                                OffloadCi mode = OffloadCi::kDestination) {
  CFBreakdown cf;
  const int S = sc.num_sites;
  const int T = sc.num_slots;
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < T; ++t) {
      const double ci = sc.ci(s, t);
      cf.grid += ci * vars.x(s, t);
      cf.battery += ci * vars.u(s, t);
      for (int s2 = 0; s2 < S; ++s2) cf.loss += sc.beta(s2, s) * ci * vars.y(s, s2, t);
    }
  }
  for (int n = 0; n < sc.num_tasks(); ++n) {
    const Placement p = vars.assignment[n];
    cf.offload += offload_cost(sc, sc.tasks[n], p.site, p.slot, mode);
  }
  return cf;
}

// Violations of the scheme's restrictions (no offloading: home site only; no
// sharing: batteries feed only their own server).
inline std::vector<std::string> verify_scheme(const Scenario& sc, Scheme scheme,
                                              const SolutionVars& vars) {
  std::vector<std::string> out;
  if (!scheme.offloading) {
    for (int n = 0; n < sc.num_tasks(); ++n)
      if (vars.assignment[n].site != sc.tasks[n].home_site)
        out.push_back("task " + std::to_string(n + 1) + " offloaded under " + scheme.name());
  }
  if (!scheme.sharing) {
    for (int s = 0; s < sc.num_sites; ++s)
      for (int s2 = 0; s2 < sc.num_sites; ++s2)
        for (int t = 0; t < sc.num_slots; ++t)
          if (s != s2 && vars.y(s, s2, t) > kEqualityTolerance)
            out.push_back("battery " + std::to_string(s2 + 1) + " shared with server " +
                          std::to_string(s + 1) + " under " + scheme.name());
  }
  return out;
}

// Thrown when the tasks cannot all be placed. Carries a max-flow diagnosis of
// how many tasks the (site, slot) capacities can absorb.
class InfeasibleScenario : public std::runtime_error {
 public:
  InfeasibleScenario(int demanded, FlowUnits reachable, std::vector<int> unserved)
      : std::runtime_error(describe(demanded, reachable)),
        demanded_(demanded),
        reachable_(reachable),
        unserved_(std::move(unserved)) {}

  [[nodiscard]] int demanded() const { return demanded_; }
  [[nodiscard]] FlowUnits reachable() const { return reachable_; }
  // Tasks left unplaced by one maximum placement (0-based ids).
  [[nodiscard]] const std::vector<int>& unserved_tasks() const { return unserved_; }

 private:
  static std::string describe(int demanded, FlowUnits reachable) {
    std::ostringstream os;
    os << demanded << " task-unit" << (demanded == 1 ? "" : "s") << " demanded, " << reachable
       << " unit" << (reachable == 1 ? "" : "s") << " of (site,slot) capacity reachable";
    if (reachable >= demanded) os << " (battery energy cannot be balanced)";
    return os.str();
  }
  int demanded_;
  FlowUnits reachable_;
  std::vector<int> unserved_;
};

inline InfeasibleScenario diagnose_infeasibility(const Scenario& sc, Scheme scheme) {
  FlowNetwork bip;
  const int source = bip.add_node();
  const int sink = bip.add_node();
  std::vector<int> slot_node(static_cast<std::size_t>(sc.num_sites) * sc.num_slots);
  for (int& v : slot_node) {
    v = bip.add_node();
    bip.add_arc(v, sink, sc.server_cap, 0.0);
  }
  std::vector<int> entry(sc.num_tasks());
  for (int n = 0; n < sc.num_tasks(); ++n) {
    const Task& task = sc.tasks[n];
    const int node = bip.add_node();
    entry[n] = bip.add_arc(source, node, 1, 0.0);
    for (int s : allowed_sites(task, scheme))
      for (int t = task.origin_slot; t <= task.deadline_slot; ++t)
        bip.add_arc(node, slot_node[s * sc.num_slots + t], 1, 0.0);
  }
  const MaxFlowResult mf = max_flow(bip, source, sink);
  std::vector<int> unserved;
  for (int n = 0; n < sc.num_tasks(); ++n)
    if (mf.flow[entry[n]] == 0) unserved.push_back(n);
  return InfeasibleScenario(sc.num_tasks(), mf.value, std::move(unserved));
}

struct SchemeResult {
  Scheme scheme;
  SolutionVars vars;
  CFBreakdown breakdown;
  double objective = 0.0;  // min-cost flow objective
  double runtime_ms = 0.0;
  BuiltGraph graph;
  FlowSolution flow;
};

// Global optimum for one scheme: build, solve, trace flows back, price.
inline SchemeResult solve_scheme(const Scenario& sc, Scheme scheme, BuildOptions opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  SchemeResult res;
  res.scheme = scheme;
  res.graph = build_graph(sc, scheme, opts);
  try {
    res.flow = solve_min_cost_flow(res.graph.network);
  } catch (const InfeasibleFlow&) {
    throw diagnose_infeasibility(sc, scheme);
  }
  res.vars = extract_solution(sc, res.graph.index, res.flow);
  const auto stop = std::chrono::steady_clock::now();
  res.breakdown = cf_breakdown(sc, res.vars, opts.offload_ci);
  res.objective = res.flow.objective;
  res.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return res;
}

}  // namespace carbonflow
