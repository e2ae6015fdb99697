#pragma once

// Problem instance, decision variables and an independent checker for the
// scheduling/charging constraints. Sites, slots and tasks are 0-based in
// memory; the JSON layer (io.hpp) converts to and from 1-based indices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "carbonflow/matrix.hpp"

namespace carbonflow {

using Energy = std::int64_t;  // integral multiples of the per-task energy E

struct Task {
  int id = 0;
  int origin_slot = 0;
  int deadline_slot = 0;
  int home_site = 0;
  std::vector<int> candidates;  // sorted, unique
};

struct Scenario {
  int num_sites = 0;
  int num_slots = 0;
  std::vector<Task> tasks;
  Matrix<double> ci;         // S x T, gCO2eq/kWh
  Matrix<Energy> renewable;  // S x T
  Matrix<double> alpha;      // S x S, energy per task transferred s_n -> s
  Matrix<double> beta;       // S x S, loss per unit shared battery s' -> server s
  Energy battery_cap = 0;
  Energy server_cap = 0;
  std::vector<Energy> initial_battery;  // length S

  [[nodiscard]] int num_tasks() const { return static_cast<int>(tasks.size()); }

  // An empty-task instance with all-zero matrices.
  static Scenario zeros(int sites, int slots) {
    Scenario sc;
    sc.num_sites = sites;
    sc.num_slots = slots;
    sc.ci = Matrix<double>(sites, slots, 0.0);
    sc.renewable = Matrix<Energy>(sites, slots, 0);
    sc.alpha = Matrix<double>(sites, sites, 0.0);
    sc.beta = Matrix<double>(sites, sites, 0.0);
    sc.initial_battery.assign(sites, 0);
    return sc;
  }
};

// Fills every off-diagonal entry with `value`, leaving the diagonal at zero.
inline Matrix<double> broadcast_off_diagonal(int sites, double value) {
  Matrix<double> m(sites, sites, 0.0);
  for (int a = 0; a < sites; ++a)
    for (int b = 0; b < sites; ++b)
      if (a != b) m(a, b) = value;
  return m;
}

struct Placement {
  int site = 0;
  int slot = 0;
  bool operator==(const Placement&) const = default;
};

// Decision variables. y(s, s2, t) is the energy battery s2 delivers to
// server s in slot t.
struct SolutionVars {
  std::vector<Placement> assignment;
  Matrix<double> x;  // grid -> server
  Tensor3<double> y;
  Matrix<double> z;  // renewable -> server
  Matrix<double> u;  // grid -> battery
  Matrix<double> v;  // renewable -> battery
  Matrix<double> w;  // battery level at end of slot

  static SolutionVars zeros(const Scenario& sc) {
    const auto S = static_cast<std::size_t>(sc.num_sites);
    const auto T = static_cast<std::size_t>(sc.num_slots);
    SolutionVars vars;
    vars.assignment.resize(sc.tasks.size());
    vars.x = Matrix<double>(S, T);
    vars.y = Tensor3<double>(S, S, T);
    vars.z = Matrix<double>(S, T);
    vars.u = Matrix<double>(S, T);
    vars.v = Matrix<double>(S, T);
    vars.w = Matrix<double>(S, T);
    return vars;
  }
};

struct CFBreakdown {
  double grid = 0.0;
  double battery = 0.0;
  double offload = 0.0;
  double loss = 0.0;

  [[nodiscard]] double total() const { return grid + battery + offload + loss; }
};

struct ValidationReport {
  std::vector<std::string> violations;
  [[nodiscard]] bool ok() const { return violations.empty(); }
};

class InvalidScenario : public std::invalid_argument {
 public:
  explicit InvalidScenario(const ValidationReport& report)
      : std::invalid_argument(join(report)), report_(report) {}
  [[nodiscard]] const ValidationReport& report() const { return report_; }

 private:
  static std::string join(const ValidationReport& r) {
    std::string out = "invalid scenario:";
    for (const auto& v : r.violations) out += "\n  " + v;
    return out;
  }
  ValidationReport report_;
};

inline ValidationReport validate_scenario(const Scenario& sc) {
  ValidationReport rep;
  auto add = [&rep](std::string msg) { rep.violations.push_back(std::move(msg)); };
  const int S = sc.num_sites;
  const int T = sc.num_slots;
  if (S < 1) add("num_sites must be at least 1");
  if (T < 1) add("num_slots must be at least 1");
  if (S < 1 || T < 1) return rep;

  auto shape = [&](const char* name, std::size_t r, std::size_t c, int er, int ec) {
    if (r != static_cast<std::size_t>(er) || c != static_cast<std::size_t>(ec)) {
      std::ostringstream os;
      os << name << " has shape " << r << "x" << c << ", expected " << er << "x" << ec;
      add(os.str());
      return false;
    }
    return true;
  };
  const bool ci_ok = shape("ci", sc.ci.rows(), sc.ci.cols(), S, T);
  const bool r_ok = shape("renewable", sc.renewable.rows(), sc.renewable.cols(), S, T);
  const bool a_ok = shape("alpha", sc.alpha.rows(), sc.alpha.cols(), S, S);
  const bool b_ok = shape("beta", sc.beta.rows(), sc.beta.cols(), S, S);

  auto non_negative = [&](const char* name, auto values) {
    for (auto v : values) {
      if (!(v >= 0) || !std::isfinite(static_cast<double>(v))) {
        add(std::string(name) + " has a negative or non-finite entry");
        return;
      }
    }
  };
  if (ci_ok) non_negative("ci", sc.ci.values());
  if (r_ok) non_negative("renewable", sc.renewable.values());
  if (a_ok) non_negative("alpha", sc.alpha.values());
  if (b_ok) non_negative("beta", sc.beta.values());
  for (int s = 0; s < S; ++s) {
    if (a_ok && sc.alpha(s, s) != 0.0)
      add("nonzero self-transfer: alpha[" + std::to_string(s + 1) + "][" + std::to_string(s + 1) + "]");
    if (b_ok && sc.beta(s, s) != 0.0)
      add("nonzero self-loss: beta[" + std::to_string(s + 1) + "][" + std::to_string(s + 1) + "]");
  }

  if (sc.battery_cap < 0) add("battery_cap is negative");
  if (sc.server_cap < 0) add("server_cap is negative");
  if (sc.initial_battery.size() != static_cast<std::size_t>(S)) {
    add("initial_battery has length " + std::to_string(sc.initial_battery.size()) +
        ", expected " + std::to_string(S));
  } else {
    for (int s = 0; s < S; ++s) {
      if (sc.initial_battery[s] < 0 || sc.initial_battery[s] > sc.battery_cap)
        add("initial_battery[" + std::to_string(s + 1) + "] outside [0, battery_cap]");
    }
  }

  for (std::size_t n = 0; n < sc.tasks.size(); ++n) {
    const Task& task = sc.tasks[n];
    const std::string tag = "task " + std::to_string(n + 1) + ": ";
    if (task.origin_slot < 0 || task.origin_slot >= T) add(tag + "origin slot out of range");
    if (task.deadline_slot < 0 || task.deadline_slot >= T) add(tag + "deadline slot out of range");
    if (task.deadline_slot < task.origin_slot) add(tag + "deadline before origin");
    if (task.home_site < 0 || task.home_site >= S) add(tag + "home site out of range");
    if (task.candidates.empty()) add(tag + "empty candidate set");
    if (!std::is_sorted(task.candidates.begin(), task.candidates.end()) ||
        std::adjacent_find(task.candidates.begin(), task.candidates.end()) != task.candidates.end())
      add(tag + "candidate set not sorted/unique");
    for (int c : task.candidates)
      if (c < 0 || c >= S) add(tag + "candidate site " + std::to_string(c + 1) + " out of range");
  }
  return rep;
}

enum class Constraint {
  kTaskAssignment,    // each task once, inside its window and candidate set
  kServerEnergy,      // x + sum y + z = tasks served
  kServerCapacity,    // x + sum y + z <= H
  kBatteryCapacity,   // u + v + w_prev <= L
  kBatteryEvolution,  // w = u + v + w_prev - battery outflow
  kRenewable,         // z + v <= R
  kNonNegative,
};

inline const char* constraint_name(Constraint c) {
  switch (c) {
    case Constraint::kTaskAssignment: return "task-assignment";
    case Constraint::kServerEnergy: return "server-energy-balance";
    case Constraint::kServerCapacity: return "server-capacity";
    case Constraint::kBatteryCapacity: return "battery-capacity";
    case Constraint::kBatteryEvolution: return "battery-evolution";
    case Constraint::kRenewable: return "renewable-availability";
    case Constraint::kNonNegative: return "non-negativity";
  }
  return "?";
}

struct ConstraintViolation {
  Constraint constraint;
  int task = -1;  // for kTaskAssignment
  int site = -1;
  int slot = -1;
  double lhs = 0.0;
  double rhs = 0.0;

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    os << constraint_name(constraint);
    if (task >= 0) os << " task=" << task + 1;
    if (site >= 0) os << " site=" << site + 1;
    if (slot >= 0) os << " slot=" << slot + 1;
    os << " (lhs=" << lhs << ", rhs=" << rhs << ")";
    return os.str();
  }
};

struct ConstraintReport {
  std::vector<ConstraintViolation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] bool passed(Constraint c) const {
    return std::none_of(violations.begin(), violations.end(),
                        [c](const ConstraintViolation& v) { return v.constraint == c; });
  }
};

inline constexpr double kEqualityTolerance = 1e-9;

// Checks every constraint of the scheduling model against `vars`. Battery
// evolution and capacity apply from the first slot on, seeded with
// scenario.initial_battery.
inline ConstraintReport verify_constraints(const Scenario& sc, const SolutionVars& vars) {
  const auto S = static_cast<std::size_t>(sc.num_sites);
  const auto T = static_cast<std::size_t>(sc.num_slots);
  auto matches = [&](const Matrix<double>& m) { return m.rows() == S && m.cols() == T; };
  if (vars.assignment.size() != sc.tasks.size() || !matches(vars.x) || !matches(vars.z) ||
      !matches(vars.u) || !matches(vars.v) || !matches(vars.w) || vars.y.dim0() != S ||
      vars.y.dim1() != S || vars.y.dim2() != T || sc.initial_battery.size() != S)
    throw std::invalid_argument("solution variables do not match the scenario shape");

  ConstraintReport rep;
  auto flag = [&rep](Constraint c, int task, int site, int slot, double lhs, double rhs) {
    rep.violations.push_back({c, task, site, slot, lhs, rhs});
  };
  const double tol = kEqualityTolerance;

  Matrix<double> served(S, T, 0.0);
  for (std::size_t n = 0; n < sc.tasks.size(); ++n) {
    const Task& task = sc.tasks[n];
    const Placement p = vars.assignment[n];
    const bool in_window = p.slot >= task.origin_slot && p.slot <= task.deadline_slot;
    // Running at the home site is never an offload, so it is always allowed.
    const bool candidate =
        p.site == task.home_site ||
        std::binary_search(task.candidates.begin(), task.candidates.end(), p.site);
    if (!in_window || !candidate || p.site < 0 || p.site >= sc.num_sites || p.slot < 0 ||
        p.slot >= sc.num_slots) {
      flag(Constraint::kTaskAssignment, static_cast<int>(n), p.site, p.slot, in_window ? 1 : 0,
           candidate ? 1 : 0);
      continue;
    }
    served(p.site, p.slot) += 1.0;
  }

  for (auto m : {&vars.x, &vars.z, &vars.u, &vars.v, &vars.w}) {
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t t = 0; t < T; ++t)
        if ((*m)(s, t) < -tol) flag(Constraint::kNonNegative, -1, int(s), int(t), (*m)(s, t), 0);
  }
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t s2 = 0; s2 < S; ++s2)
      for (std::size_t t = 0; t < T; ++t)
        if (vars.y(s, s2, t) < -tol)
          flag(Constraint::kNonNegative, -1, int(s), int(t), vars.y(s, s2, t), 0);

  const auto cap_h = static_cast<double>(sc.server_cap);
  const auto cap_l = static_cast<double>(sc.battery_cap);
  for (std::size_t s = 0; s < S; ++s) {
    double level = static_cast<double>(sc.initial_battery[s]);
    for (std::size_t t = 0; t < T; ++t) {
      double from_batteries = 0.0;
      double battery_out = 0.0;
      for (std::size_t s2 = 0; s2 < S; ++s2) {
        from_batteries += vars.y(s, s2, t);
        battery_out += vars.y(s2, s, t);
      }
      const double drawn = vars.x(s, t) + from_batteries + vars.z(s, t);
      if (std::abs(drawn - served(s, t)) > tol)
        flag(Constraint::kServerEnergy, -1, int(s), int(t), drawn, served(s, t));
      if (drawn > cap_h + tol) flag(Constraint::kServerCapacity, -1, int(s), int(t), drawn, cap_h);

      const double stored = vars.u(s, t) + vars.v(s, t) + level;
      if (stored > cap_l + tol)
        flag(Constraint::kBatteryCapacity, -1, int(s), int(t), stored, cap_l);
      const double expected = stored - battery_out;
      if (std::abs(vars.w(s, t) - expected) > tol)
        flag(Constraint::kBatteryEvolution, -1, int(s), int(t), vars.w(s, t), expected);

      const double renewable_used = vars.z(s, t) + vars.v(s, t);
      const auto avail = static_cast<double>(sc.renewable(s, t));
      if (renewable_used > avail + tol)
        flag(Constraint::kRenewable, -1, int(s), int(t), renewable_used, avail);
      level = vars.w(s, t);
    }
  }
  return rep;
}

}  // namespace carbonflow
