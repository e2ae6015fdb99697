#include "carbonflow/oracle.hpp"

#include <gtest/gtest.h>

#include "support/instances.hpp"

namespace carbonflow {
namespace {

TEST(BruteForceTest, SinglePlacement) {
  const OracleResult res = brute_force_optimum(testing::single_task(), Scheme::s1());
  ASSERT_TRUE(res.feasible);
  EXPECT_DOUBLE_EQ(res.total, 110.0);
  EXPECT_EQ(res.best, std::vector<Placement>({{0, 0}}));
}

TEST(BruteForceTest, OffloadingPair) {
  const Scenario sc = testing::offloading_pair();
  const OracleResult s1 = brute_force_optimum(sc, Scheme::s1());
  EXPECT_NEAR(s1.total, 26.4, 1e-9);
  EXPECT_EQ(s1.evaluated, 2u);
  const OracleResult s4 = brute_force_optimum(sc, Scheme::s4());
  EXPECT_NEAR(s4.total, 593.0, 1e-9);
  EXPECT_EQ(s4.evaluated, 1u);
}

TEST(BruteForceTest, NoTasks) {
  const OracleResult res = brute_force_optimum(Scenario::zeros(2, 3), Scheme::s1());
  ASSERT_TRUE(res.feasible);
  EXPECT_DOUBLE_EQ(res.total, 0.0);
  EXPECT_TRUE(res.best.empty());
}

TEST(BruteForceTest, EnumerationLimit) {
  Scenario sc = Scenario::zeros(2, 3);
  sc.server_cap = 10;
  for (int n = 0; n < 8; ++n) sc.tasks.push_back(testing::make_task(n, 0, 2, 0, {0, 1}));
  EXPECT_EQ(enumerate_placements(sc, Scheme::s1()).size(), 1679616.0);  // 6^8
  try {
    brute_force_optimum(sc, Scheme::s1(), 1000);
    FAIL() << "expected the limit to trip";
  } catch (const std::length_error& e) {
    EXPECT_NE(std::string(e.what()).find("shrink the instance"), std::string::npos);
  }
}

TEST(BruteForceTest, InfeasibleInstance) {
  Scenario sc = testing::single_task();
  sc.tasks.push_back(testing::make_task(1, 0, 0, 0, {0}));
  EXPECT_FALSE(brute_force_optimum(sc, Scheme::s1()).feasible);
}

TEST(OracleEquivalenceTest, FiftyRandomInstancesAllSchemes) {
  for (OffloadCi mode : {OffloadCi::kDestination, OffloadCi::kOrigin}) {
    const OracleCheckSummary sum = run_oracle_check(50, 1, mode);
    EXPECT_EQ(sum.comparisons, 200);
    EXPECT_LT(sum.infeasible, sum.comparisons);
    for (const auto& m : sum.mismatches)
      ADD_FAILURE() << "seed " << m.seed << " " << m.scheme.name() << ": " << m.detail;
  }
}

TEST(OracleEquivalenceTest, BestAssignmentReprices) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Scenario sc = make_oracle_instance(seed);
    for (Scheme scheme : kAllSchemes) {
      const OracleResult res = brute_force_optimum(sc, scheme);
      if (!res.feasible) continue;
      EXPECT_NEAR(cf_breakdown(sc, res.vars).total(), res.total, 1e-9 * std::max(1.0, res.total))
          << "seed " << seed;
      EXPECT_TRUE(verify_constraints(sc, res.vars).ok()) << "seed " << seed;
      EXPECT_TRUE(verify_scheme(sc, scheme, res.vars).empty()) << "seed " << seed;
    }
  }
}

}  // namespace
}  // namespace carbonflow
