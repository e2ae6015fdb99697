#include "carbonflow/reformulate.hpp"

#include <gtest/gtest.h>

#include "carbonflow/datagen.hpp"
#include "carbonflow/oracle.hpp"
#include "support/instances.hpp"

namespace carbonflow {
namespace {

using testing::make_task;

TEST(SchemeTest, NamesAndParsing) {
  EXPECT_EQ(Scheme::parse("s3"), Scheme::s3());
  EXPECT_EQ(Scheme::parse("S2").name(), "S2");
  EXPECT_THROW(Scheme::parse("s5"), std::invalid_argument);
  EXPECT_EQ(parse_offload_ci("origin"), OffloadCi::kOrigin);
  EXPECT_THROW(parse_offload_ci("dest"), std::invalid_argument);
}

TEST(BuildGraphTest, SingleTaskCounts) {
  const BuiltGraph g = build_graph(testing::single_task(), Scheme::s1());
  EXPECT_EQ(g.network.num_nodes(), 8);
  EXPECT_EQ(g.network.num_arcs(), 10);
  EXPECT_TRUE(g.network.is_balanced());
}

TEST(BuildGraphTest, TwoByTwoCounts) {
  const Scenario sc = Scenario::zeros(2, 2);
  const BuiltGraph g = build_graph(sc, Scheme::s1());
  EXPECT_EQ(g.network.num_nodes(), 22);
  EXPECT_EQ(g.network.num_arcs(), 39);
  EXPECT_EQ(build_graph(sc, Scheme::s2()).network.num_arcs(), 39 - 4);
}

TEST(BuildGraphTest, SchemeRestrictionsDropArcs) {
  const Scenario sc = testing::offloading_pair();
  const int s1 = build_graph(sc, Scheme::s1()).network.num_arcs();
  const int s4 = build_graph(sc, Scheme::s4()).network.num_arcs();
  EXPECT_EQ(s1 - s4, 2 + 1);  // two cross-site sharing arcs, one offload arc
}

TEST(BuildGraphTest, SuppliesAndAttributes) {
  Scenario sc = testing::sharing_pair();
  sc.initial_battery = {1, 0};
  const BuiltGraph g = build_graph(sc, Scheme::s1());
  const FlowNetwork& net = g.network;
  const GraphIndex& ix = g.index;
  EXPECT_EQ(net.supply(ix.grid), 1);
  EXPECT_EQ(net.supply(ix.surplus), -2);
  EXPECT_EQ(net.supply(ix.renewable_node(0, 0)), 1);
  EXPECT_EQ(net.supply(ix.battery_in(0, 0)), 1);
  EXPECT_EQ(net.supply(ix.task_node[0]), -1);
  EXPECT_EQ(net.arc(ix.battery_arc(0, 0)).capacity, 1);
  EXPECT_EQ(net.arc(ix.server_arc(1, 0)).capacity, 1);
  EXPECT_DOUBLE_EQ(net.arc(ix.share(1, 0, 0)).cost, 0.2 * 375.0);
  EXPECT_DOUBLE_EQ(net.arc(ix.share(1, 1, 0)).cost, 0.0);
  EXPECT_DOUBLE_EQ(net.arc(ix.grid_to_battery(1, 0)).cost, 375.0);
  EXPECT_EQ(ix.carry(0, 0), -1);
}

TEST(BuildGraphTest, RejectsInvalidScenario) {
  Scenario sc = Scenario::zeros(1, 1);
  sc.beta(0, 0) = 0.5;
  EXPECT_THROW(build_graph(sc, Scheme::s1()), InvalidScenario);
}

TEST(ExtractSolutionTest, GridOnlyRoute) {
  const SchemeResult res = solve_scheme(testing::single_task(), Scheme::s1());
  EXPECT_EQ(res.vars.assignment[0], (Placement{0, 0}));
  EXPECT_DOUBLE_EQ(res.vars.x(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(res.vars.z(0, 0) + res.vars.u(0, 0) + res.vars.v(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(res.breakdown.total(), 110.0);
}

TEST(ExtractSolutionTest, RenewableServesEarlySlot) {
  Scenario sc = Scenario::zeros(1, 2);
  sc.ci(0, 0) = sc.ci(0, 1) = 300.0;
  sc.renewable(0, 0) = 1;
  sc.battery_cap = 1;
  sc.server_cap = 1;
  sc.tasks.push_back(make_task(0, 0, 1, 0, {0}));
  const SchemeResult res = solve_scheme(sc, Scheme::s1());
  EXPECT_DOUBLE_EQ(res.breakdown.total(), 0.0);
  EXPECT_EQ(res.vars.assignment[0], (Placement{0, 0}));
  EXPECT_DOUBLE_EQ(res.vars.z(0, 0), 1.0);
  EXPECT_TRUE(verify_constraints(sc, res.vars).ok());
}

TEST(ExtractSolutionTest, BatterySharingAcrossSites) {
  const Scenario sc = testing::sharing_pair();
  const SchemeResult res = solve_scheme(sc, Scheme::s1());
  EXPECT_DOUBLE_EQ(res.vars.v(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(res.vars.y(1, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(res.breakdown.loss, 75.0);
  EXPECT_DOUBLE_EQ(res.breakdown.total(), 75.0);
  EXPECT_TRUE(verify_constraints(sc, res.vars).ok());

  const SchemeResult s2 = solve_scheme(sc, Scheme::s2());
  EXPECT_DOUBLE_EQ(s2.breakdown.total(), 375.0);
  EXPECT_TRUE(verify_scheme(sc, Scheme::s2(), s2.vars).empty());
}

TEST(ExtractSolutionTest, SplitTaskFlowIsRejected) {
  const Scenario sc = testing::offloading_pair();
  const BuiltGraph g = build_graph(sc, Scheme::s1());
  FlowSolution fake;
  fake.flow.assign(g.network.num_arcs(), 0);
  for (const TaskArc& ta : g.index.task_arcs[0]) fake.flow[ta.arc] = 1;
  EXPECT_THROW(extract_solution(sc, g.index, fake), std::logic_error);
  fake.flow.assign(g.network.num_arcs(), 0);
  EXPECT_THROW(extract_solution(sc, g.index, fake), std::logic_error);
}

TEST(CfBreakdownTest, GridTermAndZeroSolution) {
  const Scenario sc = testing::single_task();
  SolutionVars vars = SolutionVars::zeros(sc);
  vars.x(0, 0) = 1;
  const CFBreakdown cf = cf_breakdown(sc, vars);
  EXPECT_DOUBLE_EQ(cf.grid, 110.0);
  EXPECT_DOUBLE_EQ(cf.total(), 110.0);

  const CFBreakdown zero = cf_breakdown(Scenario::zeros(2, 2), SolutionVars::zeros(Scenario::zeros(2, 2)));
  EXPECT_DOUBLE_EQ(zero.total(), 0.0);
}

TEST(SolveSchemeTest, OffloadingToCleanGrid) {
  const Scenario sc = testing::offloading_pair();
  const SchemeResult s1 = solve_scheme(sc, Scheme::s1());
  EXPECT_NEAR(s1.breakdown.total(), 26.4, 1e-9);
  EXPECT_NEAR(s1.breakdown.grid, 24.0, 1e-9);
  EXPECT_NEAR(s1.breakdown.offload, 2.4, 1e-9);
  EXPECT_EQ(s1.vars.assignment[0].site, 1);
  EXPECT_NEAR(solve_scheme(sc, Scheme::s4()).breakdown.total(), 593.0, 1e-9);
}

TEST(SolveSchemeTest, OriginPricingOfOffloads) {
  const Scenario sc = testing::offloading_pair();
  const SchemeResult s1 = solve_scheme(sc, Scheme::s1(), {OffloadCi::kOrigin});
  EXPECT_NEAR(s1.breakdown.total(), 24.0 + 0.1 * 593.0, 1e-9);
  EXPECT_NEAR(s1.objective, s1.breakdown.total(), 1e-9);
}

TEST(SolveSchemeTest, CapacityShortfallIsDiagnosed) {
  Scenario sc = testing::single_task();
  sc.tasks.push_back(make_task(1, 0, 0, 0, {0}));
  try {
    solve_scheme(sc, Scheme::s1());
    FAIL() << "expected infeasibility";
  } catch (const InfeasibleScenario& e) {
    EXPECT_STREQ(e.what(), "2 task-units demanded, 1 unit of (site,slot) capacity reachable");
    EXPECT_EQ(e.unserved_tasks().size(), 1u);
  }
}

std::vector<Scenario> property_instances() {
  std::vector<Scenario> out;
  // Scheme dominance relies on the home site being a candidate.
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Scenario sc = make_oracle_instance(seed);
    for (Task& task : sc.tasks) {
      auto& c = task.candidates;
      if (!std::binary_search(c.begin(), c.end(), task.home_site))
        c.insert(std::lower_bound(c.begin(), c.end(), task.home_site), task.home_site);
    }
    out.push_back(std::move(sc));
  }
  CiTable ci;
  ci.regions = {"a", "b", "c"};
  for (int r = 0; r < 3; ++r) {
    ci.series.emplace_back();
    for (int t = 0; t < 24; ++t) ci.series.back().push_back(50.0 + 100.0 * r + 7.0 * ((t * (r + 3)) % 11));
  }
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.num_tasks = 60;
    out.push_back(generate_scenario(cfg, ci));
  }
  return out;
}

TEST(SolveSchemePropertyTest, DominanceObjectiveIdentityAndConstraints) {
  for (const Scenario& sc : property_instances()) {
    std::vector<std::optional<double>> cf;
    for (Scheme scheme : kAllSchemes) {
      try {
        const SchemeResult res = solve_scheme(sc, scheme);
        EXPECT_NEAR(res.objective, res.breakdown.total(),
                    1e-9 * std::max(1.0, res.breakdown.total()));
        EXPECT_TRUE(verify_constraints(sc, res.vars).ok());
        EXPECT_TRUE(verify_scheme(sc, scheme, res.vars).empty());
        EXPECT_TRUE(check_certificate(res.graph.network, res.flow));
        cf.push_back(res.breakdown.total());
      } catch (const InfeasibleScenario&) {
        cf.push_back(std::nullopt);
      }
    }
    auto leq = [](const std::optional<double>& a, const std::optional<double>& b) {
      if (!b) return true;
      return a && *a <= *b * (1 + 1e-12) + 1e-9;
    };
    EXPECT_TRUE(leq(cf[0], cf[1]));
    EXPECT_TRUE(leq(cf[1], cf[3]));
    EXPECT_TRUE(leq(cf[0], cf[2]));
    EXPECT_TRUE(leq(cf[2], cf[3]));
  }
}

TEST(SolveSchemePropertyTest, CapacityMonotonicity) {
  for (const Scenario& base : property_instances()) {
    for (Scheme scheme : {Scheme::s1(), Scheme::s4()}) {
      double prev = std::numeric_limits<double>::infinity();
      for (Energy l = 0; l <= 4; ++l) {
        Scenario sc = base;
        sc.battery_cap = l;
        std::fill(sc.initial_battery.begin(), sc.initial_battery.end(), 0);
        double cur = std::numeric_limits<double>::infinity();
        try {
          cur = solve_scheme(sc, scheme).breakdown.total();
        } catch (const InfeasibleScenario&) {
        }
        EXPECT_LE(cur, prev + 1e-9);
        prev = cur;
      }
      prev = std::numeric_limits<double>::infinity();
      for (Energy h = base.server_cap; h <= base.server_cap + 3; ++h) {
        Scenario sc = base;
        sc.server_cap = h;
        double cur = std::numeric_limits<double>::infinity();
        try {
          cur = solve_scheme(sc, scheme).breakdown.total();
        } catch (const InfeasibleScenario&) {
        }
        EXPECT_LE(cur, prev + 1e-9);
        prev = cur;
      }
    }
  }
}

TEST(SolveSchemePropertyTest, UniformIntensityMakesOffloadingUseless) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Scenario sc = make_oracle_instance(seed);
    for (int t = 0; t < sc.num_slots; ++t)
      for (int s = 0; s < sc.num_sites; ++s) sc.ci(s, t) = sc.ci(0, t);
    sc.alpha = sc.beta = Matrix<double>(2, 2, 0.0);
    sc.renewable = Matrix<Energy>(2, 3, 0);
    sc.battery_cap = 0;
    sc.initial_battery = {0, 0};
    sc.server_cap = 4;
    const double s1 = solve_scheme(sc, Scheme::s1()).breakdown.total();
    const double s4 = solve_scheme(sc, Scheme::s4()).breakdown.total();
    EXPECT_NEAR(s1, s4, 1e-9 * std::max(1.0, s4)) << "seed " << seed;
  }
}

TEST(SolveSchemePropertyTest, InitialBatteryIsSpent) {
  Scenario sc = testing::single_task();
  sc.battery_cap = 1;
  sc.initial_battery = {1};
  const SchemeResult res = solve_scheme(sc, Scheme::s4());
  EXPECT_DOUBLE_EQ(res.breakdown.total(), 0.0);
  EXPECT_DOUBLE_EQ(res.vars.y(0, 0, 0), 1.0);
  EXPECT_TRUE(verify_constraints(sc, res.vars).ok());
}

}  // namespace
}  // namespace carbonflow
