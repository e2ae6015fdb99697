#include "carbonflow/model.hpp"

#include <gtest/gtest.h>

#include "support/instances.hpp"

namespace carbonflow {
namespace {

using testing::make_task;

bool mentions(const ValidationReport& rep, const std::string& needle) {
  for (const auto& v : rep.violations)
    if (v.find(needle) != std::string::npos) return true;
  return false;
}

TEST(ValidateScenarioTest, EmptyInstanceIsValid) {
  EXPECT_TRUE(validate_scenario(Scenario::zeros(1, 1)).ok());
}

TEST(ValidateScenarioTest, DeadlineBeforeOrigin) {
  Scenario sc = Scenario::zeros(1, 4);
  sc.tasks.push_back(make_task(0, 2, 1, 0, {0}));
  EXPECT_TRUE(mentions(validate_scenario(sc), "deadline before origin"));
}

TEST(ValidateScenarioTest, NonzeroSelfLoss) {
  Scenario sc = Scenario::zeros(2, 1);
  sc.beta(0, 0) = 0.2;
  EXPECT_TRUE(mentions(validate_scenario(sc), "nonzero self-loss"));
}

TEST(ValidateScenarioTest, ShapeNegativityAndRanges) {
  Scenario sc = Scenario::zeros(2, 3);
  sc.ci = Matrix<double>(2, 2);
  sc.renewable(1, 1) = -1;
  sc.battery_cap = 1;
  sc.initial_battery = {0, 2};
  sc.tasks.push_back(make_task(0, 0, 5, 0, {}));
  const ValidationReport rep = validate_scenario(sc);
  EXPECT_TRUE(mentions(rep, "ci has shape 2x2"));
  EXPECT_TRUE(mentions(rep, "renewable has a negative"));
  EXPECT_TRUE(mentions(rep, "initial_battery[2]"));
  EXPECT_TRUE(mentions(rep, "deadline slot out of range"));
  EXPECT_TRUE(mentions(rep, "empty candidate set"));
}

class VerifyConstraintsTest : public ::testing::Test {
 protected:
  Scenario sc = testing::single_task();
  SolutionVars vars = SolutionVars::zeros(sc);
  void SetUp() override {
    vars.assignment[0] = {0, 0};
    vars.x(0, 0) = 1;
  }
};

TEST_F(VerifyConstraintsTest, GridServesTheTask) {
  EXPECT_TRUE(verify_constraints(sc, vars).ok());
}

TEST_F(VerifyConstraintsTest, MissingEnergyBreaksServerBalance) {
  vars.x(0, 0) = 0;
  const ConstraintReport rep = verify_constraints(sc, vars);
  ASSERT_FALSE(rep.passed(Constraint::kServerEnergy));
  EXPECT_EQ(rep.violations.front().site, 0);
  EXPECT_EQ(rep.violations.front().slot, 0);
  EXPECT_TRUE(rep.passed(Constraint::kServerCapacity));
}

TEST_F(VerifyConstraintsTest, ServerCapacity) {
  sc.server_cap = 0;
  EXPECT_FALSE(verify_constraints(sc, vars).passed(Constraint::kServerCapacity));
}

TEST_F(VerifyConstraintsTest, WindowAndCandidates) {
  vars.assignment[0] = {0, 1};
  EXPECT_FALSE(verify_constraints(sc, vars).passed(Constraint::kTaskAssignment));
}

TEST_F(VerifyConstraintsTest, ShapeMismatchThrows) {
  vars.x = Matrix<double>(2, 2);
  EXPECT_THROW(verify_constraints(sc, vars), std::invalid_argument);
}

TEST(VerifyConstraintsBatteryTest, StoredEnergyAboveCapacity) {
  Scenario sc = Scenario::zeros(1, 2);
  sc.battery_cap = 5;
  sc.server_cap = 1;
  SolutionVars vars = SolutionVars::zeros(sc);
  vars.w(0, 0) = 3;
  vars.u(0, 1) = 3;
  vars.w(0, 1) = 6;
  const ConstraintReport rep = verify_constraints(sc, vars);
  EXPECT_FALSE(rep.passed(Constraint::kBatteryCapacity));
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.constraint == Constraint::kBatteryCapacity && v.slot == 1) {
      found = true;
      EXPECT_DOUBLE_EQ(v.lhs, 6.0);
      EXPECT_DOUBLE_EQ(v.rhs, 5.0);
    }
  EXPECT_TRUE(found);
}

TEST(VerifyConstraintsBatteryTest, EvolutionAndRenewableLimits) {
  Scenario sc = Scenario::zeros(2, 1);
  sc.battery_cap = 2;
  sc.server_cap = 1;
  sc.renewable(0, 0) = 1;
  sc.tasks.push_back(make_task(0, 0, 0, 1, {1}));
  SolutionVars vars = SolutionVars::zeros(sc);
  vars.assignment[0] = {1, 0};
  vars.v(0, 0) = 1;
  vars.y(1, 0, 0) = 1;
  EXPECT_TRUE(verify_constraints(sc, vars).ok());

  vars.w(0, 0) = 1;  // the unit was handed to server 2, it cannot remain stored
  EXPECT_FALSE(verify_constraints(sc, vars).passed(Constraint::kBatteryEvolution));
  vars.w(0, 0) = 0;
  vars.z(0, 0) = 1;
  EXPECT_FALSE(verify_constraints(sc, vars).passed(Constraint::kRenewable));
}

TEST(ConstraintViolationTest, DescribeIsOneBased) {
  const ConstraintViolation v{Constraint::kServerCapacity, -1, 0, 2, 3.0, 1.0};
  EXPECT_EQ(v.describe(), "server-capacity site=1 slot=3 (lhs=3, rhs=1)");
}

}  // namespace
}  // namespace carbonflow
