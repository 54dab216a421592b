#include <gtest/gtest.h>

#include "dpdlab/bench.hpp"

using namespace dpdlab;

namespace {

RoundTrace make_trace(std::int64_t t, double cost, std::vector<double> rho, VectorXd coupling) {
  RoundTrace tr;
  tr.t = t;
  tr.cost = cost;
  tr.rho = std::move(rho);
  tr.coupling = std::move(coupling);
  return tr;
}

}  // namespace

TEST(Metrics, BestCostIsRunningMinimum) {
  std::vector<RoundTrace> trace = {make_trace(0, 5.0, {0.0}, VectorXd::Constant(1, 0.0)),
                                   make_trace(1, 3.0, {0.0}, VectorXd::Constant(1, 0.0)),
                                   make_trace(2, 4.0, {0.0}, VectorXd::Constant(1, 0.0))};
  const auto rows = metrics(trace, 2.0);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_DOUBLE_EQ(rows[0].f_best, 5.0);
  EXPECT_DOUBLE_EQ(rows[1].f_best, 3.0);
  EXPECT_DOUBLE_EQ(rows[2].f_best, 3.0);
  EXPECT_DOUBLE_EQ(rows[2].cost_err, 1.0);
}

TEST(Metrics, ViolationBoundedByTotalRho) {
  const auto inst = gen_pev(5, 12);
  DpdEngine eng(inst.problem, inst.network, inst.defaults.schedule, 30.0, init_state(inst.problem, InitPreset::asym));
  std::vector<RoundTrace> trace;
  for (int t = 0; t < 60; ++t) trace.push_back(eng.run_round());
  for (const auto& r : metrics(trace, 1.0)) EXPECT_LE(r.max_coupling, r.sum_rho + 1e-9);
}

TEST(NormalizedError, RelativeToOptimum) {
  EXPECT_DOUBLE_EQ(normalized_error(11.0, 10.0), 0.1);
  EXPECT_DOUBLE_EQ(normalized_error(-9.0, -10.0), 0.1);
}

TEST(RateBound, ConstantStepAtStart) {
  // z0 = z*: the bound reduces to C a / 2.
  EXPECT_DOUBLE_EQ(rate_bound(StepSchedule::constant(0.01), 0, 0.0, 200.0), 1.0);
  EXPECT_DOUBLE_EQ(rate_bound(StepSchedule::constant(0.5), 3, 4.0, 0.0), 1.0);
}

TEST(RateBound, HarmonicStep) {
  EXPECT_NEAR(rate_bound(StepSchedule::harmonic(0.5), 0, 1.0, 4.0), 2.0 / std::log(2.0), 1e-12);
}

TEST(RateBound, PowerStepUnsupported) {
  try {
    rate_bound(StepSchedule::power(1.0, 0.6), 0, 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::schedule_unsupported);
  }
}

TEST(RateBounds, ReportsExcessAndDistance) {
  std::vector<MetricRow> rows(2);
  rows[0].t = 0;
  rows[0].f_best = 3.0;
  rows[1].t = 1;
  rows[1].f_best = 2.5;
  BlockVector z0(1, 1), zs(1, 1);
  z0.data << 1.0, 0.0;
  const auto rep = rate_bounds(rows, 2.0, StepSchedule::constant(1.0), z0, zs, {0.5}, 0.0, "test");
  EXPECT_DOUBLE_EQ(rep.dist_sq, 2.0);
  EXPECT_DOUBLE_EQ(rep.bound[0], 1.0);
  EXPECT_DOUBLE_EQ(rep.bound[1], 0.5);
  EXPECT_DOUBLE_EQ(rep.max_excess, 0.0);
  EXPECT_TRUE(rep.holds(0.0));
}

TEST(Generators, BasicExampleReferencesInRange) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = gen_basic(seed);
    for (const auto& a : inst.problem.agents) {
      EXPECT_GE(a.l1_refs.front().minCoeff(), 15.0);
      EXPECT_LE(a.l1_refs.front().maxCoeff(), 20.0);
    }
    EXPECT_NEAR(validate_slater(inst.problem, inst.slater).gamma, 150.0, 1e-12);
    EXPECT_GT(centralized_reference(inst.problem).f_star, 0.0);
  }
}

TEST(Generators, ChargingInstanceIsConnectedAndSeeded) {
  const auto a = gen_pev(7, 30), b = gen_pev(7, 30);
  EXPECT_EQ(a.network.graph.edges(), b.network.graph.edges());
  EXPECT_EQ(a.network.activation.sigma(), b.network.activation.sigma());
  EXPECT_EQ(a.problem.s_dim, 12);
  for (double s : a.network.activation.sigma()) {
    EXPECT_GE(s, 0.3);
    EXPECT_LE(s, 0.9);
  }
}
