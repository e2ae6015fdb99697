#pragma once

// Test-only exhaustive minimum over all integral feasible flows of a small
// network. Arcs are decided one at a time; a dynamic program over the vector
// of node balances keeps, per reachable balance vector, the cheapest partial
// assignment. A node is closed (must balance to zero) after its last arc.
// This shares no code with the solver.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "carbonflow/mcf.hpp"

namespace carbonflow::testing {

inline std::optional<double> enumerate_min_cost(const FlowNetwork& net) {
  const int n = net.num_nodes();
  const int m = net.num_arcs();
  FlowUnits bound = 0;
  for (FlowUnits s : net.supplies()) bound += s > 0 ? s : 0;

  std::vector<FlowUnits> caps(m);
  for (int a = 0; a < m; ++a) caps[a] = net.arc(a).unbounded() ? bound : net.arc(a).capacity;

  // Remaining inbound/outbound capacity per node after each arc is decided.
  std::vector<FlowUnits> rem_in(n, 0), rem_out(n, 0);
  for (int a = 0; a < m; ++a) {
    rem_out[net.arc(a).tail] += caps[a];
    rem_in[net.arc(a).head] += caps[a];
  }

  std::map<std::vector<FlowUnits>, double> states;
  states.emplace(net.supplies(), 0.0);
  auto admissible = [&](const std::vector<FlowUnits>& bal) {
    for (int v = 0; v < n; ++v)
      if (bal[v] < -rem_in[v] || bal[v] > rem_out[v]) return false;
    return true;
  };
  if (!admissible(net.supplies())) return std::nullopt;

  for (int a = 0; a < m; ++a) {
    const Arc& arc = net.arc(a);
    rem_out[arc.tail] -= caps[a];
    rem_in[arc.head] -= caps[a];
    std::map<std::vector<FlowUnits>, double> next;
    for (const auto& [bal, cost] : states) {
      for (FlowUnits f = 0; f <= caps[a]; ++f) {
        std::vector<FlowUnits> nb = bal;
        nb[arc.tail] -= f;
        nb[arc.head] += f;
        if (!admissible(nb)) continue;
        const double c = cost + arc.cost * static_cast<double>(f);
        auto [it, inserted] = next.emplace(std::move(nb), c);
        if (!inserted) it->second = std::min(it->second, c);
      }
    }
    states = std::move(next);
    if (states.empty()) return std::nullopt;
  }
  const std::vector<FlowUnits> zero(n, 0);
  const auto it = states.find(zero);
  if (it == states.end()) return std::nullopt;
  return it->second;
}

}  // namespace carbonflow::testing
