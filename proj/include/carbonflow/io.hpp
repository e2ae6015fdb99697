#pragma once

// JSON documents for scenarios and solutions. Site, slot and task indices
// are 1-based on disk.

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "carbonflow/datagen.hpp"
#include "carbonflow/model.hpp"
#include "carbonflow/reformulate.hpp"

namespace carbonflow {

using nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw FormatError(std::string("missing key '") + key + "'");
  return j.at(key);
}

inline Energy as_energy(const json& j, const std::string& what) {
  if (j.is_number_unsigned() || j.is_number_integer()) return j.get<Energy>();
  if (j.is_number_float()) {
    const double d = j.get<double>();
    if (d == static_cast<double>(static_cast<Energy>(d))) return static_cast<Energy>(d);
  }
  throw FormatError(what + " must be an integer (in units of task energy)");
}

inline double as_real(const json& j, const std::string& what) {
  if (!j.is_number()) throw FormatError(what + " must be a number");
  return j.get<double>();
}

template <typename T, typename Conv>
Matrix<T> read_matrix(const json& j, int rows, int cols, const std::string& what, Conv conv) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw FormatError(what + " must be an array of " + std::to_string(rows) + " rows");
  Matrix<T> m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw FormatError(what + " row " + std::to_string(r + 1) + " must have " +
                        std::to_string(cols) + " entries");
    for (int c = 0; c < cols; ++c) m(r, c) = conv(row[c], what);
  }
  return m;
}

template <typename T>
json write_matrix(const Matrix<T>& m) {
  json out = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    out.push_back(std::vector<T>(row.begin(), row.end()));
  }
  return out;
}

inline Matrix<double> read_pairwise(const json& j, int sites, const std::string& what) {
  if (j.is_number()) return broadcast_off_diagonal(sites, j.get<double>());
  return read_matrix<double>(j, sites, sites, what, as_real);
}

inline json write_pairwise(const Matrix<double>& m) {
  std::optional<double> common;
  bool uniform = true;
  for (std::size_t a = 0; a < m.rows(); ++a) {
    for (std::size_t b = 0; b < m.cols(); ++b) {
      if (a == b) {
        uniform &= m(a, b) == 0.0;
        continue;
      }
      if (!common) common = m(a, b);
      uniform &= m(a, b) == *common;
    }
  }
  if (uniform) return common.value_or(0.0);
  return write_matrix(m);
}

}  // namespace detail

inline Scenario scenario_from_json(const json& j) {
  using namespace detail;
  Scenario sc;
  sc.num_sites = static_cast<int>(as_energy(require(j, "num_sites"), "num_sites"));
  sc.num_slots = static_cast<int>(as_energy(require(j, "num_slots"), "num_slots"));
  if (sc.num_sites < 1 || sc.num_slots < 1)
    throw FormatError("num_sites and num_slots must be at least 1");
  const int S = sc.num_sites;
  const int T = sc.num_slots;
  sc.ci = read_matrix<double>(require(j, "ci"), S, T, "ci", as_real);
  sc.renewable = read_matrix<Energy>(require(j, "renewable"), S, T, "renewable", as_energy);
  sc.alpha = read_pairwise(require(j, "alpha"), S, "alpha");
  sc.beta = read_pairwise(require(j, "beta"), S, "beta");
  sc.battery_cap = as_energy(require(j, "battery_cap"), "battery_cap");
  sc.server_cap = as_energy(require(j, "server_cap"), "server_cap");
  sc.initial_battery.assign(S, 0);
  if (j.contains("initial_battery")) {
    const json& ib = j.at("initial_battery");
    if (!ib.is_array() || static_cast<int>(ib.size()) != S)
      throw FormatError("initial_battery must be an array of " + std::to_string(S) + " entries");
    for (int s = 0; s < S; ++s) sc.initial_battery[s] = as_energy(ib[s], "initial_battery");
  }
  const json& tasks = require(j, "tasks");
  if (!tasks.is_array()) throw FormatError("tasks must be an array");
  for (std::size_t n = 0; n < tasks.size(); ++n) {
    const json& tj = tasks[n];
    const std::string what = "tasks[" + std::to_string(n) + "]";
    Task task;
    task.id = tj.contains("id") ? static_cast<int>(as_energy(tj.at("id"), what + ".id")) - 1
                                : static_cast<int>(n);
    task.origin_slot = static_cast<int>(as_energy(require(tj, "origin_slot"), what)) - 1;
    task.deadline_slot = static_cast<int>(as_energy(require(tj, "deadline_slot"), what)) - 1;
    task.home_site = static_cast<int>(as_energy(require(tj, "home_site"), what)) - 1;
    const json& cand = require(tj, "candidates");
    if (!cand.is_array()) throw FormatError(what + ".candidates must be an array");
    for (const json& c : cand) task.candidates.push_back(static_cast<int>(as_energy(c, what)) - 1);
    std::sort(task.candidates.begin(), task.candidates.end());
    task.candidates.erase(std::unique(task.candidates.begin(), task.candidates.end()),
                          task.candidates.end());
    sc.tasks.push_back(std::move(task));
  }
  return sc;
}

inline json scenario_to_json(const Scenario& sc) {
  using namespace detail;
  json j;
  j["num_sites"] = sc.num_sites;
  j["num_slots"] = sc.num_slots;
  j["ci"] = write_matrix(sc.ci);
  j["renewable"] = write_matrix(sc.renewable);
  j["alpha"] = write_pairwise(sc.alpha);
  j["beta"] = write_pairwise(sc.beta);
  j["battery_cap"] = sc.battery_cap;
  j["server_cap"] = sc.server_cap;
  j["initial_battery"] = sc.initial_battery;
  json tasks = json::array();
  for (const Task& t : sc.tasks) {
    std::vector<int> cand;
    for (int c : t.candidates) cand.push_back(c + 1);
    tasks.push_back({{"id", t.id + 1},
                     {"origin_slot", t.origin_slot + 1},
                     {"deadline_slot", t.deadline_slot + 1},
                     {"home_site", t.home_site + 1},
                     {"candidates", cand}});
  }
  j["tasks"] = std::move(tasks);
  return j;
}

// Generator provenance stored next to a generated scenario.
inline json generator_to_json(const GenConfig& c, const CiTable& ci) {
  std::vector<std::string> regions(ci.regions.begin(), ci.regions.begin() + c.num_sites);
  return {{"seed", c.seed},
          {"rng", "mt19937_64"},
          {"daytime_slots", {c.day_start, c.day_end}},
          {"slot_convention", "slot t covers clock hours [t-1, t)"},
          {"renewable_binomial", {{"trials", c.trials}, {"probability", c.probability}}},
          {"regions", regions}};
}

struct SolutionDocument {
  bool feasible = false;
  std::string scheme;
  std::string offload_ci = "destination";
  std::optional<Energy> battery_cap;
  std::optional<Energy> server_cap;
  double objective = 0.0;
  CFBreakdown breakdown;
  SolutionVars vars;
  double runtime_ms = 0.0;
  std::vector<FlowUnits> flow;       // empty when not recorded
  std::vector<double> potentials;
  std::string diagnosis;
};

inline json solution_to_json(const Scenario& sc, const SchemeResult& res, OffloadCi mode,
                             bool include_flow = true) {
  using namespace detail;
  json j;
  j["feasible"] = true;
  j["scheme"] = res.scheme.name();
  j["offload_ci"] = to_string(mode);
  j["battery_cap"] = sc.battery_cap;
  j["server_cap"] = sc.server_cap;
  j["objective"] = res.objective;
  j["breakdown"] = {{"grid", res.breakdown.grid},
                    {"battery", res.breakdown.battery},
                    {"offload", res.breakdown.offload},
                    {"loss", res.breakdown.loss}};
  json assignments = json::array();
  for (std::size_t n = 0; n < res.vars.assignment.size(); ++n) {
    const Placement p = res.vars.assignment[n];
    assignments.push_back({{"task", sc.tasks[n].id + 1}, {"site", p.site + 1}, {"slot", p.slot + 1}});
  }
  j["assignments"] = std::move(assignments);
  j["x"] = write_matrix(res.vars.x);
  j["z"] = write_matrix(res.vars.z);
  j["u"] = write_matrix(res.vars.u);
  j["v"] = write_matrix(res.vars.v);
  j["w"] = write_matrix(res.vars.w);
  json y = json::array();
  for (std::size_t s = 0; s < res.vars.y.dim0(); ++s) {
    json per_server = json::array();
    for (std::size_t s2 = 0; s2 < res.vars.y.dim1(); ++s2) {
      std::vector<double> series;
      for (std::size_t t = 0; t < res.vars.y.dim2(); ++t) series.push_back(res.vars.y(s, s2, t));
      per_server.push_back(series);
    }
    y.push_back(std::move(per_server));
  }
  j["y"] = std::move(y);
  j["runtime_ms"] = res.runtime_ms;
  if (include_flow) {
    j["flow"] = res.flow.flow;
    j["potentials"] = res.flow.potentials;
  }
  return j;
}

inline json infeasible_solution_to_json(Scheme scheme, OffloadCi mode, const Scenario& sc,
                                        const std::string& diagnosis) {
  return {{"feasible", false},
          {"scheme", scheme.name()},
          {"offload_ci", to_string(mode)},
          {"battery_cap", sc.battery_cap},
          {"server_cap", sc.server_cap},
          {"objective", nullptr},
          {"diagnosis", diagnosis}};
}

inline SolutionDocument solution_from_json(const json& j, const Scenario& sc) {
  using namespace detail;
  SolutionDocument doc;
  doc.feasible = require(j, "feasible").get<bool>();
  doc.scheme = require(j, "scheme").get<std::string>();
  if (j.contains("offload_ci")) doc.offload_ci = j.at("offload_ci").get<std::string>();
  if (j.contains("battery_cap")) doc.battery_cap = as_energy(j.at("battery_cap"), "battery_cap");
  if (j.contains("server_cap")) doc.server_cap = as_energy(j.at("server_cap"), "server_cap");
  if (j.contains("diagnosis")) doc.diagnosis = j.at("diagnosis").get<std::string>();
  if (!doc.feasible) return doc;

  const int S = sc.num_sites;
  const int T = sc.num_slots;
  doc.objective = as_real(require(j, "objective"), "objective");
  const json& b = require(j, "breakdown");
  doc.breakdown.grid = as_real(require(b, "grid"), "breakdown.grid");
  doc.breakdown.battery = as_real(require(b, "battery"), "breakdown.battery");
  doc.breakdown.offload = as_real(require(b, "offload"), "breakdown.offload");
  doc.breakdown.loss = as_real(require(b, "loss"), "breakdown.loss");

  doc.vars = SolutionVars::zeros(sc);
  const json& assignments = require(j, "assignments");
  if (!assignments.is_array() || assignments.size() != sc.tasks.size())
    throw FormatError("assignments must list every task exactly once");
  std::vector<bool> seen(sc.tasks.size(), false);
  for (const json& a : assignments) {
    const int id = static_cast<int>(as_energy(require(a, "task"), "task")) - 1;
    int n = -1;
    for (std::size_t k = 0; k < sc.tasks.size(); ++k)
      if (sc.tasks[k].id == id) n = static_cast<int>(k);
    if (n < 0 || seen[n]) throw FormatError("unknown or repeated task " + std::to_string(id + 1));
    seen[n] = true;
    doc.vars.assignment[n] = {static_cast<int>(as_energy(require(a, "site"), "site")) - 1,
                              static_cast<int>(as_energy(require(a, "slot"), "slot")) - 1};
  }
  doc.vars.x = read_matrix<double>(require(j, "x"), S, T, "x", as_real);
  doc.vars.z = read_matrix<double>(require(j, "z"), S, T, "z", as_real);
  doc.vars.u = read_matrix<double>(require(j, "u"), S, T, "u", as_real);
  doc.vars.v = read_matrix<double>(require(j, "v"), S, T, "v", as_real);
  doc.vars.w = read_matrix<double>(require(j, "w"), S, T, "w", as_real);
  const json& y = require(j, "y");
  if (!y.is_array() || static_cast<int>(y.size()) != S) throw FormatError("y has the wrong shape");
  for (int s = 0; s < S; ++s) {
    const Matrix<double> slab = read_matrix<double>(y[s], S, T, "y", as_real);
    for (int s2 = 0; s2 < S; ++s2)
      for (int t = 0; t < T; ++t) doc.vars.y(s, s2, t) = slab(s2, t);
  }
  if (j.contains("runtime_ms")) doc.runtime_ms = as_real(j.at("runtime_ms"), "runtime_ms");
  if (j.contains("flow")) doc.flow = j.at("flow").get<std::vector<FlowUnits>>();
  if (j.contains("potentials")) doc.potentials = j.at("potentials").get<std::vector<double>>();
  return doc;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace carbonflow
