// carbonflow: scenario generation, optimal solving, capacity sweeps and
// solution verification for carbon-aware task placement at the edge.
//
// Exit codes: 0 ok, 1 verification failure, 2 input error, 3 infeasible.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carbonflow/datagen.hpp"
#include "carbonflow/io.hpp"
#include "carbonflow/mcf.hpp"
#include "carbonflow/model.hpp"
#include "carbonflow/oracle.hpp"
#include "carbonflow/reformulate.hpp"
#include "carbonflow/sweep.hpp"

namespace cf = carbonflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitInputError = 2;
constexpr int kExitInfeasible = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "0:14" (inclusive range) or "1,2,5".
template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      if (const auto colon = item.find(':'); colon != std::string::npos) {
        const T lo = static_cast<T>(std::stoll(item.substr(0, colon)));
        const T hi = static_cast<T>(std::stoll(item.substr(colon + 1)));
        for (T v = lo; v <= hi; ++v) out.push_back(v);
      } else {
        out.push_back(static_cast<T>(std::stoll(item)));
      }
    } catch (const std::exception&) {
      throw InputError(std::string("cannot parse ") + what + " '" + text + "'");
    }
  }
  return out;
}

struct GenFlags {
  cf::GenConfig config;
  std::string ci_path;

  void attach(CLI::App* cmd) {
    cmd->add_option("--ci", ci_path, "Carbon-intensity CSV (region,slot,ci_g_per_kwh)");
    cmd->add_option("--sites", config.num_sites, "Number of sites")->capture_default_str();
    cmd->add_option("--slots", config.num_slots, "Number of time slots")->capture_default_str();
    cmd->add_option("--tasks", config.num_tasks, "Number of tasks")->capture_default_str();
    cmd->add_option("--trials", config.trials, "Renewable binomial trials")->capture_default_str();
    cmd->add_option("--probability", config.probability, "Renewable binomial probability")
        ->capture_default_str();
    cmd->add_option("--day-start", config.day_start, "First daytime slot (1-based)")
        ->capture_default_str();
    cmd->add_option("--day-end", config.day_end, "Last daytime slot (1-based)")
        ->capture_default_str();
    cmd->add_option("--alpha", config.alpha, "Energy per task transfer")->capture_default_str();
    cmd->add_option("--beta", config.beta, "Loss per shared energy unit")->capture_default_str();
  }

  cf::CiTable load_ci() const {
    if (ci_path.empty()) throw InputError("--ci is required");
    if (!std::filesystem::exists(ci_path))
      throw InputError("CI file not found: '" + ci_path + "'");
    try {
      return cf::load_ci_csv(ci_path);
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
  }
};

cf::Scenario load_scenario(const std::string& path) {
  try {
    cf::Scenario sc = cf::scenario_from_json(cf::read_json_file(path));
    if (auto rep = cf::validate_scenario(sc); !rep.ok()) throw cf::InvalidScenario(rep);
    return sc;
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void print_breakdown(std::ostream& os, const cf::CFBreakdown& b) {
  os << "total_cf " << b.total() << '\n'
     << "  grid    " << b.grid << '\n'
     << "  battery " << b.battery << '\n'
     << "  offload " << b.offload << '\n'
     << "  loss    " << b.loss << '\n';
}

int cmd_generate(GenFlags& flags, std::uint64_t seed, cf::Energy battery_cap,
                 cf::Energy server_cap, const std::string& out_path) {
  flags.config.seed = seed;
  flags.config.battery_cap = battery_cap;
  flags.config.server_cap = server_cap;
  const cf::CiTable ci = flags.load_ci();
  cf::Scenario sc;
  try {
    sc = cf::generate_scenario(flags.config, ci);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  cf::json j = cf::scenario_to_json(sc);
  j["generator"] = cf::generator_to_json(flags.config, ci);
  cf::write_json_file(out_path, j);

  cf::Energy renewable = 0;
  for (cf::Energy r : sc.renewable.values()) renewable += r;
  std::cout << "seed " << seed << "\nsites " << sc.num_sites << "\nslots " << sc.num_slots
            << "\ntasks " << sc.num_tasks() << "\ntotal_renewable " << renewable << "\nwrote "
            << out_path << '\n';
  return kExitOk;
}

int cmd_solve(const std::string& scenario_path, const std::string& scheme_name,
              std::optional<cf::Energy> battery_cap, std::optional<cf::Energy> server_cap,
              cf::OffloadCi mode, const std::string& out_path, bool with_flow) {
  cf::Scenario sc = load_scenario(scenario_path);
  if (battery_cap) sc.battery_cap = *battery_cap;
  if (server_cap) sc.server_cap = *server_cap;
  if (auto rep = cf::validate_scenario(sc); !rep.ok())
    throw InputError(cf::InvalidScenario(rep).what());
  cf::Scheme scheme;
  try {
    scheme = cf::Scheme::parse(scheme_name);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }

  try {
    const cf::SchemeResult res = cf::solve_scheme(sc, scheme, {mode});
    std::cout << "scheme " << scheme.name() << '\n';
    print_breakdown(std::cout, res.breakdown);
    std::cout << "runtime_ms " << res.runtime_ms << '\n';
    if (!out_path.empty())
      cf::write_json_file(out_path, cf::solution_to_json(sc, res, mode, with_flow));
    return kExitOk;
  } catch (const cf::InfeasibleScenario& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    if (!e.unserved_tasks().empty()) {
      std::cerr << "unplaceable tasks:";
      for (int n : e.unserved_tasks()) std::cerr << ' ' << sc.tasks[n].id + 1;
      std::cerr << '\n';
    }
    if (!out_path.empty())
      cf::write_json_file(out_path, cf::infeasible_solution_to_json(scheme, mode, sc, e.what()));
    return kExitInfeasible;
  }
}

int cmd_sweep(const std::string& scenario_path, GenFlags& flags, const std::string& seeds_text,
              const std::string& param, const std::string& values_text, cf::Energy fixed,
              const std::string& schemes_text, const std::string& out_path, bool timing,
              int jobs, cf::OffloadCi mode) {
  cf::SweepSpec spec;
  try {
    spec.parameter = cf::parse_capacity_param(param);
    std::stringstream ss(schemes_text);
    std::string item;
    while (std::getline(ss, item, ',')) spec.schemes.push_back(cf::Scheme::parse(item));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  spec.values = parse_list<cf::Energy>(values_text, "--values");
  spec.fixed = fixed;

  cf::ScenarioFactory factory;
  if (!scenario_path.empty()) {
    const cf::json j = cf::read_json_file(scenario_path);
    std::uint64_t label = 0;
    if (j.contains("generator") && j["generator"].contains("seed"))
      label = j["generator"]["seed"].get<std::uint64_t>();
    spec.seeds = {label};
    const cf::Scenario base = load_scenario(scenario_path);
    factory = [base](std::uint64_t) { return base; };
  } else {
    spec.seeds = parse_list<std::uint64_t>(seeds_text, "--seeds");
    const cf::CiTable ci = flags.load_ci();
    const cf::GenConfig config = flags.config;
    factory = [config, ci](std::uint64_t seed) {
      cf::GenConfig c = config;
      c.seed = seed;
      return cf::generate_scenario(c, ci);
    };
  }
  if (auto errs = cf::validate_sweep(spec); !errs.empty()) throw InputError(errs.front());

  std::vector<cf::SweepRow> rows;
  try {
    rows = cf::run_sweep(spec, factory, {{mode}, jobs});
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (out_path.empty()) {
    cf::write_sweep_csv(std::cout, rows, timing);
  } else {
    std::ofstream out(out_path);
    if (!out) throw InputError("cannot write '" + out_path + "'");
    cf::write_sweep_csv(out, rows, timing);
    std::cout << "wrote " << rows.size() << " rows to " << out_path << '\n';
  }
  return kExitOk;
}

bool close(double a, double b) {
  return std::abs(a - b) <= cf::kCostTolerance * std::max(1.0, std::abs(b));
}

int cmd_verify(const std::string& scenario_path, const std::string& solution_path) {
  cf::Scenario sc = load_scenario(scenario_path);
  cf::SolutionDocument doc;
  cf::Scheme scheme;
  cf::OffloadCi mode;
  try {
    const cf::json j = cf::read_json_file(solution_path);
    if (j.contains("battery_cap")) sc.battery_cap = j["battery_cap"].get<cf::Energy>();
    if (j.contains("server_cap")) sc.server_cap = j["server_cap"].get<cf::Energy>();
    doc = cf::solution_from_json(j, sc);
    scheme = cf::Scheme::parse(doc.scheme);
    mode = cf::parse_offload_ci(doc.offload_ci);
  } catch (const std::exception& e) {
    throw InputError(solution_path + ": " + e.what());
  }
  if (!doc.feasible) {
    std::cout << "FAIL solution is marked infeasible: " << doc.diagnosis << '\n';
    return kExitVerifyFailed;
  }

  std::vector<std::string> problems;
  for (const auto& v : cf::verify_constraints(sc, doc.vars).violations)
    problems.push_back(v.describe());
  for (auto& s : cf::verify_scheme(sc, scheme, doc.vars)) problems.push_back(std::move(s));

  const cf::CFBreakdown repriced = cf::cf_breakdown(sc, doc.vars, mode);
  auto compare = [&](const char* name, double stated, double actual) {
    if (!close(stated, actual)) {
      std::ostringstream os;
      os.precision(17);
      os << "re-pricing mismatch: " << name << " stated " << stated << ", recomputed " << actual;
      problems.push_back(os.str());
    }
  };
  compare("grid", doc.breakdown.grid, repriced.grid);
  compare("battery", doc.breakdown.battery, repriced.battery);
  compare("offload", doc.breakdown.offload, repriced.offload);
  compare("loss", doc.breakdown.loss, repriced.loss);
  compare("objective", doc.objective, repriced.total());

  if (!doc.flow.empty()) {
    const cf::BuiltGraph g = cf::build_graph(sc, scheme, {mode});
    cf::FlowSolution flow{doc.flow, doc.objective, doc.potentials};
    if (static_cast<int>(flow.flow.size()) != g.network.num_arcs()) {
      problems.push_back("flow vector does not match the rebuilt network");
    } else if (!cf::check_certificate(g.network, flow)) {
      problems.push_back("optimality certificate rejected");
    } else {
      const cf::SolutionVars traced = cf::extract_solution(sc, g.index, flow);
      if (traced.assignment != doc.vars.assignment || traced.x != doc.vars.x ||
          traced.y != doc.vars.y || traced.z != doc.vars.z || traced.u != doc.vars.u ||
          traced.v != doc.vars.v || traced.w != doc.vars.w)
        problems.push_back("variables do not match the recorded flow");
    }
  }

  if (problems.empty()) {
    std::cout << "OK " << scheme.name() << " total_cf " << repriced.total()
              << (doc.flow.empty() ? "" : " (certificate checked)") << '\n';
    return kExitOk;
  }
  std::cout << "FAIL " << problems.size() << " violation(s)\n";
  for (const auto& p : problems) std::cout << "  " << p << '\n';
  return kExitVerifyFailed;
}

int cmd_oracle_check(int instances, std::uint64_t seed, cf::OffloadCi mode) {
  const cf::OracleCheckSummary sum = cf::run_oracle_check(instances, seed, mode);
  std::cout << "instances " << sum.instances << "\ncomparisons " << sum.comparisons
            << "\ninfeasible " << sum.infeasible << "\nmismatches " << sum.mismatches.size()
            << '\n';
  for (const auto& m : sum.mismatches)
    std::cout << "  seed " << m.seed << ' ' << m.scheme.name() << ": " << m.detail << '\n';
  return sum.mismatches.empty() ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carbon-footprint-optimal task placement and battery sharing for edge sites"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string offload_ci = "destination";
  app.add_option("--offload-ci", offload_ci, "Grid that prices task transfer energy")
      ->check(CLI::IsMember({"destination", "origin"}))
      ->capture_default_str();

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a seeded random scenario");
  GenFlags gen_flags;
  gen_flags.attach(gen);
  std::uint64_t gen_seed = 1;
  cf::Energy gen_l = 10;
  cf::Energy gen_h = 10;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  gen->add_option("--battery-cap", gen_l, "Battery capacity L")->capture_default_str();
  gen->add_option("--server-cap", gen_h, "Server capacity H")->capture_default_str();
  gen->add_option("--out", gen_out, "Output scenario JSON")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Solve a scenario to optimality under one scheme");
  std::string solve_scenario;
  std::string solve_scheme = "s1";
  std::optional<cf::Energy> solve_l;
  std::optional<cf::Energy> solve_h;
  std::string solve_out;
  bool solve_no_flow = false;
  solve->add_option("--scenario", solve_scenario, "Scenario JSON")->required();
  solve->add_option("--scheme", solve_scheme, "s1 | s2 | s3 | s4")->capture_default_str();
  solve->add_option("--battery-cap", solve_l, "Override battery capacity L");
  solve->add_option("--server-cap", solve_h, "Override server capacity H");
  solve->add_option("--out", solve_out, "Output solution JSON");
  solve->add_flag("--no-flow", solve_no_flow, "Omit arc flows and potentials from the output");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Sweep a capacity across schemes and seeds");
  GenFlags sweep_flags;
  sweep_flags.attach(sweep);
  std::string sweep_scenario;
  std::string sweep_seeds = "1";
  std::string sweep_param = "battery_cap";
  std::string sweep_values = "0:14";
  cf::Energy sweep_fixed = 10;
  std::string sweep_schemes = "s1,s2,s3,s4";
  std::string sweep_out;
  bool sweep_timing = false;
  int sweep_jobs = 1;
  sweep->add_option("--scenario", sweep_scenario, "Scenario JSON (instead of generator flags)");
  sweep->add_option("--seeds", sweep_seeds, "Seeds, e.g. 1:10 or 1,4,7")->capture_default_str();
  sweep->add_option("--param", sweep_param, "battery_cap | server_cap")->capture_default_str();
  sweep->add_option("--values", sweep_values, "Swept values, e.g. 0:14")->capture_default_str();
  sweep->add_option("--fixed", sweep_fixed, "Value of the other capacity")->capture_default_str();
  sweep->add_option("--schemes", sweep_schemes, "Comma-separated schemes")->capture_default_str();
  sweep->add_option("--out", sweep_out, "Output CSV (stdout when omitted)");
  sweep->add_flag("--timing", sweep_timing, "Record solve runtimes (output no longer reproducible)");
  sweep->add_option("--jobs", sweep_jobs, "Worker threads")->capture_default_str();

  // verify
  auto* verify = app.add_subcommand("verify", "Check a solution file against its scenario");
  std::string verify_scenario;
  std::string verify_solution;
  verify->add_option("--scenario", verify_scenario, "Scenario JSON")->required();
  verify->add_option("--solution", verify_solution, "Solution JSON")->required();

  // oracle-check
  auto* oracle = app.add_subcommand("oracle-check",
                                    "Compare the flow model with brute-force enumeration");
  int oracle_instances = 50;
  std::uint64_t oracle_seed = 1;
  oracle->add_option("--instances", oracle_instances, "Random instances")->capture_default_str();
  oracle->add_option("--seed", oracle_seed, "First seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  const cf::OffloadCi mode = cf::parse_offload_ci(offload_ci);
  try {
    if (*gen) return cmd_generate(gen_flags, gen_seed, gen_l, gen_h, gen_out);
    if (*solve)
      return cmd_solve(solve_scenario, solve_scheme, solve_l, solve_h, mode, solve_out,
                       !solve_no_flow);
    if (*sweep)
      return cmd_sweep(sweep_scenario, sweep_flags, sweep_seeds, sweep_param, sweep_values,
                       sweep_fixed, sweep_schemes, sweep_out, sweep_timing, sweep_jobs, mode);
    if (*verify) return cmd_verify(verify_scenario, verify_solution);
    if (*oracle) return cmd_oracle_check(oracle_instances, oracle_seed, mode);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}
