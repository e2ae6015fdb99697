#pragma once

// Hand-built micro scenarios shared by the unit and CLI tests.

#include "carbonflow/model.hpp"

namespace carbonflow::testing {

inline Task make_task(int id, int origin, int deadline, int home, std::vector<int> candidates) {
  return Task{id, origin, deadline, home, std::move(candidates)};
}

// One site, one slot, one task; the grid is the only energy source.
inline Scenario single_task(double ci = 110.0) {
  Scenario sc = Scenario::zeros(1, 1);
  sc.ci(0, 0) = ci;
  sc.server_cap = 1;
  sc.tasks.push_back(make_task(0, 0, 0, 0, {0}));
  return sc;
}

// Home site priced like Poland at 08:00, the other like Sweden at 08:00.
inline Scenario offloading_pair() {
  Scenario sc = Scenario::zeros(2, 1);
  sc.ci(0, 0) = 593.0;
  sc.ci(1, 0) = 24.0;
  sc.alpha = broadcast_off_diagonal(2, 0.1);
  sc.server_cap = 1;
  sc.tasks.push_back(make_task(0, 0, 0, 0, {0, 1}));
  return sc;
}

// Site 1 has one renewable unit and an idle server; the task lives on site 2.
inline Scenario sharing_pair() {
  Scenario sc = Scenario::zeros(2, 1);
  sc.ci(0, 0) = 24.0;
  sc.ci(1, 0) = 375.0;
  sc.renewable(0, 0) = 1;
  sc.beta = broadcast_off_diagonal(2, 0.2);
  sc.battery_cap = 1;
  sc.server_cap = 1;
  sc.tasks.push_back(make_task(0, 0, 0, 1, {1}));
  return sc;
}

}  // namespace carbonflow::testing
