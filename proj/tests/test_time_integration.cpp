#include <gtest/gtest.h>

#include <cmath>

#include "csmlab/time_integration.hpp"

using namespace csmlab;

namespace {

RunConfig small_config(int n = 32) {
  RunConfig c;
  c.n = n;
  c.params.delta = kTwoPi / n;
  return c;
}

double tg_energy(double t, double nu) { return 2.0 * std::numbers::pi * std::numbers::pi * std::exp(-4.0 * nu * t); }

}  // namespace

TEST(RunConfig, ValidationNamesKeys) {
  auto expect_key = [](RunConfig c, const std::string& key) {
    try {
      c.validate();
      FAIL() << "expected rejection naming " << key;
    } catch (const InvalidInput& e) {
      EXPECT_NE(std::string(e.what()).find(key), std::string::npos) << e.what();
    }
  };
  RunConfig c = small_config();
  c.dt = -1.0;
  expect_key(c, "dt");
  c = small_config();
  c.n = 7;
  expect_key(c, "n");
  c = small_config();
  c.t_end = 0.0;
  expect_key(c, "t_end");
  c = small_config();
  c.record_every = 0;
  expect_key(c, "record_every");
}

TEST(Step, TaylorGreenDecaysExactly) {
  RunConfig c = small_config();
  c.t_end = 1.0;
  c.record_every = 50;
  const RunResult r = run(c);
  ASSERT_TRUE(r.completed());
  ASSERT_EQ(r.records.size(), 21u);
  for (const auto& rec : r.records) EXPECT_NEAR(rec.l2_sq / tg_energy(rec.t, 0.1), 1.0, 1e-12);
  const VelocityField exact = taylor_green(WavenumberGrid::make(32), 1.0, 0.1);
  EXPECT_LT((r.final_state.velocity - exact).max_amplitude(), 1e-13);
}

TEST(Step, ClosureDrainsEnergyFasterThanViscosity) {
  RunConfig nse = small_config();
  nse.t_end = 0.5;
  RunConfig csm = nse;
  csm.model = ModelKind::CSM;
  csm.params.cs = 0.5;
  EXPECT_LT(run(csm).records.back().l2_sq, run(nse).records.back().l2_sq);
}

TEST(Step, RecordCadenceIncludesEndpoint) {
  RunConfig c = small_config(16);
  c.dt = 0.03;
  c.t_end = 0.1;
  c.record_every = 2;
  const RunResult r = run(c);
  ASSERT_EQ(r.records.size(), 3u);  // t = 0, 0.06, then after the shortened fourth step
  EXPECT_DOUBLE_EQ(r.records[1].t, 0.06);
  EXPECT_DOUBLE_EQ(r.records.back().t, 0.1);
  EXPECT_EQ(r.final_state.step_index, 4);
  EXPECT_NEAR(r.records.back().l2_sq / tg_energy(0.1, 0.1), 1.0, 1e-12);
}

TEST(Step, CumulativeIntegralsUseTrapezoid) {
  RunConfig c = small_config(16);
  c.t_end = 0.2;
  c.record_every = 20;
  const RunResult r = run(c);
  // grad_hs_sq of TG is 2 * 3^2 * E(t). Integrals are accumulated over the
  // recorded samples, t = 0, 0.02, ..., 0.2.
  const double nu = 0.1;
  double trapezoid = 0.0;
  for (int j = 0; j < 10; ++j) trapezoid += 0.01 * 18.0 * (tg_energy(0.02 * j, nu) + tg_energy(0.02 * (j + 1), nu));
  EXPECT_NEAR(r.records.back().cum_grad_hs, trapezoid, 1e-10 * trapezoid);
  const double exact = 18.0 * tg_energy(0, nu) * (1.0 - std::exp(-4 * nu * 0.2)) / (4 * nu);
  EXPECT_NEAR(r.records.back().cum_grad_hs, exact, 1e-5 * exact);
  EXPECT_EQ(r.records.back().cum_forcing_hs, 0.0);
}

TEST(Step, ForcingContributesToDiagnostics) {
  RunConfig c = small_config(16);
  c.t_end = 0.1;
  c.forcing.kind = ForcingKind::SteadyBandLimited;
  c.forcing.amplitude = 0.1;
  const RunResult r = run(c);
  ASSERT_TRUE(r.completed());
  // Two unit-direction cosine modes of amplitude a: ||f||^2 = 2 * 2 pi^2 a^2 at s = 0,
  // weighted by (1+|k|^2)^2 = 4 and 9.
  const double a2 = 0.01, pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(r.records.front().forcing_hs_sq, 2 * pi2 * a2 * (4.0 + 9.0), 1e-12);
  EXPECT_NEAR(r.records.back().cum_forcing_hs, 0.1 * 2 * pi2 * a2 * 13.0, 1e-12);
}

TEST(Step, StaysSolenoidal) {
  RunConfig c = small_config();
  c.model = ModelKind::CSM;
  c.t_end = 0.2;
  c.initial_condition.kind = InitialCondition::Kind::BandLimitedSeeded;
  c.initial_condition.seed = 3;
  const RunResult r = run(c);
  for (const auto& rec : r.records) EXPECT_LT(rec.divergence_residual, 1e-12);
}

TEST(Stability, CflAbortLeavesPartialSeries) {
  RunConfig c = small_config();
  c.model = ModelKind::CSM;
  c.dt = 0.1;  // about 100 times the stable step on n = 32
  c.t_end = 1.0;
  const RunResult r = run(c);
  ASSERT_FALSE(r.completed());
  EXPECT_EQ(r.abort->reason, "CFL");
  EXPECT_EQ(r.records.size(), 1u);
}

TEST(Stability, CflLimitsFromState) {
  const auto g = WavenumberGrid::make(32);
  const VelocityField v = taylor_green(g, 0.0, 0.1);
  ModelParams p;
  p.delta = g->spacing();
  const FlowModel nse(ModelKind::NSE, p, {});
  const CflLimits lim = cfl_limits(v, nse);
  EXPECT_NEAR(lim.advective, 0.5 * g->spacing() / 1.0, 1e-12);
  EXPECT_TRUE(std::isinf(lim.closure));
  const FlowModel csm(ModelKind::CSM, p, {});
  EXPECT_TRUE(std::isfinite(cfl_limits(v, csm).closure));
  EXPECT_THROW(check_cfl(v, nse, 1.0), NumericalAbort);
  EXPECT_NO_THROW(check_cfl(v, nse, 1e-3));
}

TEST(Stability, OverflowIsANumericalAbort) {
  const auto g = WavenumberGrid::make(16);
  VelocityField v = band_limited_noise(g, 1, 1.0, 4);
  v *= 1e160;
  ModelParams p;
  p.delta = g->spacing();
  const FlowModel model(ModelKind::NSE, p, {});
  try {
    step({0.0, v, 0}, model, 1e-3);
    FAIL() << "expected NumericalAbort";
  } catch (const NumericalAbort& e) {
    EXPECT_EQ(e.reason(), "NaN");
  }
}

TEST(Runs, IdenticalConfigsAreBitIdentical) {
  RunConfig c = small_config();
  c.model = ModelKind::CSM;
  c.t_end = 0.2;
  c.initial_condition.kind = InitialCondition::Kind::BandLimitedSeeded;
  const RunResult a = run(c);
  const RunResult b = run(c);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].l2_sq, b.records[i].l2_sq);
    EXPECT_EQ(a.records[i].hs_sq, b.records[i].hs_sq);
  }
  c.initial_condition.seed = 2;
  EXPECT_NE(run(c).records.back().l2_sq, a.records.back().l2_sq);
}

TEST(Pair, PerturbationHasRequestedSize) {
  RunConfig u = small_config(16);
  u.t_end = 0.1;
  RunConfig w = u;
  w.model = ModelKind::CSM;
  const PairResult p = run_pair(u, w, 1e-3, 5);
  ASSERT_TRUE(p.completed());
  EXPECT_NEAR(p.phi.front().phi_l2_sq, 1e-6, 1e-18);
  EXPECT_EQ(p.phi.size(), p.u.records.size());
  EXPECT_EQ(p.phi.front().cum_nu_phi_grad, 0.0);
}

TEST(Pair, ZeroEpsilonIdenticalModelsGiveZeroError) {
  RunConfig u = small_config(16);
  u.t_end = 0.1;
  u.params.cs = 0.0;
  RunConfig w = u;
  w.model = ModelKind::CSM;
  const PairResult p = run_pair(u, w, 0.0, 5);
  for (const auto& r : p.phi) EXPECT_EQ(r.phi_l2_sq, 0.0);
}

TEST(Pair, RejectsMismatchedConfigs) {
  RunConfig u = small_config(16);
  RunConfig w = u;
  w.model = ModelKind::CSM;
  RunConfig bad = w;
  bad.dt = 2e-3;
  EXPECT_THROW(run_pair(u, bad, 1e-3, 1), InvalidInput);
  bad = w;
  bad.forcing.kind = ForcingKind::SteadyBandLimited;
  bad.forcing.amplitude = 0.1;
  EXPECT_THROW(run_pair(u, bad, 1e-3, 1), InvalidInput);
  EXPECT_THROW(run_pair(w, w, 1e-3, 1), InvalidInput);
  EXPECT_THROW(run_pair(u, w, -1.0, 1), InvalidInput);
}
