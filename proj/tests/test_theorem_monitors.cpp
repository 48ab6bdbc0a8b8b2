#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csmlab/theorem_monitors.hpp"

using namespace csmlab;

namespace {

// Samples of dE/dt = a E + g(t) from a fine RK4 integration.
struct Synthetic {
  std::vector<double> t, e, g;
};

Synthetic integrate(double a, double e0, double dt, int samples) {
  Synthetic s;
  double y = e0;
  const int sub = 20;
  const double h = dt / sub;
  auto f = [a](double v) { return a * v + 1.0; };
  for (int j = 0; j < samples; ++j) {
    s.t.push_back(j * dt);
    s.e.push_back(y);
    s.g.push_back(1.0);
    for (int k = 0; k < sub; ++k) {
      const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
      y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  }
  return s;
}

std::vector<DiagnosticRecord> tg_records(double nu, double s, double t_end, int count) {
  // Closed-form TG diagnostics: hs = (1+2)^s E(t), grad_hs = 2 (1+2)^s E(t).
  std::vector<DiagnosticRecord> out;
  const double e0 = 2.0 * std::numbers::pi * std::numbers::pi;
  const double w = std::pow(3.0, s);
  for (int j = 0; j < count; ++j) {
    DiagnosticRecord r;
    r.t = t_end * j / (count - 1);
    r.l2_sq = e0 * std::exp(-4 * nu * r.t);
    r.hs_sq = w * r.l2_sq;
    r.grad_hs_sq = 2 * w * r.l2_sq;
    r.cum_grad_hs = 2 * w * e0 * (1 - std::exp(-4 * nu * r.t)) / (4 * nu);
    out.push_back(r);
  }
  return out;
}

PairRecord pair_record(double t, double phi, double cum_grad, double cum_f) {
  PairRecord r;
  r.t = t;
  r.phi_l2_sq = phi;
  r.cum_nu_phi_grad = cum_grad;
  r.cum_forcing_hs = cum_f;
  return r;
}

}  // namespace

TEST(Groenwall, DecayingEnergyNeedsNoGrowth) {
  std::vector<double> t, e, g;
  for (int j = 0; j < 100; ++j) {
    t.push_back(0.01 * j);
    e.push_back(std::exp(-t.back()));
    g.push_back(0.0);
  }
  EXPECT_EQ(groenwall_fit(t, e, g), 0.0);
}

TEST(Groenwall, ExponentialGrowthRate) {
  std::vector<double> t, e, g;
  for (int j = 0; j <= 2000; ++j) {
    t.push_back(1e-3 * j);
    e.push_back(std::exp(2 * t.back()));
    g.push_back(0.0);
  }
  EXPECT_NEAR(groenwall_fit(t, e, g), 2.0, 5e-3);
}

TEST(Groenwall, RecoversOdeCoefficient) {
  for (double a : {0.0, 0.5, 2.0}) {
    const Synthetic s = integrate(a, 1.0, 1e-3, 1001);
    const double c = groenwall_fit(s.t, s.e, s.g);
    EXPECT_NEAR(c, a, 5e-3) << "a=" << a;
    EXPECT_GE(c, a - 1e-9);
  }
  const Synthetic s = integrate(0.5, 1.0, 1e-3, 1001);
  const double c = groenwall_fit(s.t, s.e, s.g);
  EXPECT_GE(c, 0.5);
  EXPECT_LE(c, 0.505);
}

TEST(Groenwall, RejectsBadInput) {
  std::vector<double> empty;
  EXPECT_THROW(groenwall_fit(empty, empty, empty), InvalidInput);
  std::vector<double> t{0, 1}, e{1, -1}, g{0, 0};
  EXPECT_THROW(groenwall_fit(t, e, g), InvalidInput);
  std::vector<double> short_g{0};
  std::vector<double> e_ok{1, 1};
  EXPECT_THROW(groenwall_fit(t, e_ok, short_g), InvalidInput);
}

TEST(DecayRate, ExactExponential) {
  std::vector<double> t, v;
  for (int j = 0; j < 40; ++j) {
    t.push_back(0.25 * j);
    v.push_back(std::exp(-3 * t.back()));
  }
  EXPECT_NEAR(decay_rate_fit(t, v), 3.0, 1e-9);
}

TEST(DecayRate, ConstantAndShortSeries) {
  std::vector<double> t{0, 1, 2, 3, 4}, v(5, 2.0);
  EXPECT_NEAR(decay_rate_fit(t, v), 0.0, 1e-15);
  std::vector<double> t3{0, 1, 2}, v3{1, 1, 1};
  EXPECT_THROW(decay_rate_fit(t3, v3), InvalidInput);
}

TEST(DecayRate, TaylorGreenEnergy) {
  const auto recs = tg_records(0.1, 2.0, 10.0, 101);
  std::vector<double> t, e;
  for (const auto& r : recs) {
    t.push_back(r.t);
    e.push_back(r.l2_sq);
  }
  EXPECT_NEAR(decay_rate_fit(t, e), 0.4, 0.004);
}

TEST(EnergyEnvelope, ZeroDataPassesWithFloor) {
  std::vector<DiagnosticRecord> recs(5);
  for (int j = 0; j < 5; ++j) recs[j].t = j;
  const TheoremReport rep = monitor_theorem1(recs, 2.0);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.constants.at("C"), 0.0);
  EXPECT_EQ(rep.satisfaction_fraction, 1.0);
}

TEST(EnergyEnvelope, DecayingCaseGivesInitialValue) {
  const auto recs = tg_records(0.1, 2.0, 5.0, 501);
  const TheoremReport rep = monitor_theorem1(recs, 2.0);
  ASSERT_TRUE(rep.pass);
  const double q0 = recs.front().hs_sq;
  const double c = rep.constants.at("C");
  EXPECT_NEAR(c, q0, 1e-6);
  // Returned C is feasible, C - tol is not.
  EXPECT_GE(c, q0);
  EXPECT_LT(c - 1e-6, q0);
  EXPECT_EQ(rep.satisfaction_fraction, 1.0);
  EXPECT_TRUE(rep.diagnostics.contains("envelope_A"));
}

TEST(EnergyEnvelope, GrowingSeriesNeedsLargerConstant) {
  std::vector<DiagnosticRecord> recs;
  for (int j = 0; j <= 100; ++j) {
    DiagnosticRecord r;
    r.t = 0.1 * j;
    r.hs_sq = 0.5 * std::exp(3.0 * r.t);
    recs.push_back(r);
  }
  const TheoremReport rep = monitor_theorem1(recs, 2.0);
  ASSERT_TRUE(rep.pass);
  const double c = rep.constants.at("C");
  for (const auto& r : recs) EXPECT_LE(r.hs_sq, c * std::exp(c * r.t) * (1 + 1e-6));
  // Minimal: the envelope binds at the final time, C e^{10 C} = 0.5 e^{30}.
  EXPECT_NEAR(std::log(c) + 10 * c, std::log(0.5) + 30.0, 1e-4);
  const double smaller = c - 1e-3;
  EXPECT_GT(recs.back().hs_sq, smaller * std::exp(smaller * recs.back().t));
}

TEST(EnergyEnvelope, NonFiniteSeriesFailsWithoutThrowing) {
  std::vector<DiagnosticRecord> recs(4);
  recs[2].hs_sq = std::nan("");
  const TheoremReport rep = monitor_theorem1(recs, 2.0);
  EXPECT_FALSE(rep.pass);
  EXPECT_NE(rep.reason.find("non-finite"), std::string::npos);
}

TEST(EnergyEnvelope, InfeasibleAboveCap) {
  std::vector<DiagnosticRecord> recs(2);
  recs[0].hs_sq = 2e6;
  recs[1].t = 1.0;
  MonitorSettings settings;
  EXPECT_FALSE(monitor_theorem1(recs, 2.0, settings).pass);
}

TEST(ErrorBound, ZeroErrorGivesZeroConstant) {
  std::vector<PairRecord> pair{pair_record(0, 0, 0, 0), pair_record(1, 0, 0, 0)};
  const TheoremReport rep = monitor_theorem2(pair, 0.1);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.constants.at("C"), 0.0);
}

TEST(ErrorBound, MaximumRatio) {
  std::vector<PairRecord> pair{pair_record(0, 1e-6, 0, 0), pair_record(1, 2e-6, 5e-7, 0),
                               pair_record(2, 1e-6, 8e-7, 0)};
  const TheoremReport rep = monitor_theorem2(pair, 0.1);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.constants.at("C"), 2.5, 1e-12);
  EXPECT_EQ(rep.satisfaction_fraction, 1.0);
  EXPECT_NEAR(rep.margins[1].ratio(), 1.0, 1e-12);
}

TEST(ErrorBound, VacuousViolation) {
  std::vector<PairRecord> pair{pair_record(0, 0, 0, 0), pair_record(1, 1e-9, 1e-10, 0)};
  const TheoremReport rep = monitor_theorem2(pair, 0.1);
  EXPECT_FALSE(rep.pass);
  EXPECT_NE(rep.reason.find("vacuously violated"), std::string::npos);
}

TEST(ErrorBound, ScaleCovariantForIdenticalModels) {
  RunConfig u;
  u.n = 16;
  u.t_end = 1.0;
  u.params.cs = 0.0;
  u.params.delta = kTwoPi / 16;
  u.initial_condition.kind = InitialCondition::Kind::BandLimitedSeeded;
  u.initial_condition.energy = 0.0;
  RunConfig w = u;
  w.model = ModelKind::CSM;
  // Zero base flow: the error obeys the linear heat equation.
  const double c1 = monitor_theorem2(run_pair(u, w, 1e-3, 4).phi, 0.1).constants.at("C");
  const double c2 = monitor_theorem2(run_pair(u, w, 2e-3, 4).phi, 0.1).constants.at("C");
  EXPECT_NEAR(c1, c2, 1e-9);
  EXPECT_LE(c1, 1.0 + 1e-12);
}

TEST(ErrorDecay, TrivialAndDegenerate) {
  std::vector<PairRecord> zero{pair_record(0, 0, 0, 0), pair_record(1, 0, 0, 0), pair_record(2, 0, 0, 0),
                               pair_record(3, 0, 0, 0)};
  TheoremReport rep = monitor_theorem3(zero, 0.1, 0.0);
  EXPECT_TRUE(rep.pass);
  EXPECT_FALSE(rep.decay_rate.has_value());

  std::vector<PairRecord> drift{pair_record(0, 0, 0, 0), pair_record(1, 1e-8, 0, 0)};
  rep = monitor_theorem3(drift, 0.1, 0.0);
  EXPECT_FALSE(rep.pass);
  EXPECT_NE(rep.reason.find("degenerate"), std::string::npos);
  EXPECT_NEAR(rep.diagnostics.at("max_phi_l2"), 1e-4, 1e-16);
}

TEST(ErrorDecay, UnforcedDecay) {
  std::vector<PairRecord> pair;
  for (int j = 0; j <= 40; ++j) {
    const double t = j;
    pair.push_back(pair_record(t, 1e-6 * (1 + t) * std::exp(-0.2 * t), 0, 0));
  }
  const TheoremReport rep = monitor_theorem3(pair, 0.1, 1e-3);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.constants.at("C2"), 0.0);
  double max_phi = 0;
  for (const auto& r : pair) max_phi = std::max(max_phi, r.phi_l2_sq);
  EXPECT_NEAR(rep.constants.at("C1"), max_phi / 1e-6, 1e-12);
  ASSERT_TRUE(rep.decay_rate.has_value());
  EXPECT_GT(*rep.decay_rate, 0.0);

  std::vector<PairRecord> flat;
  for (int j = 0; j <= 10; ++j) flat.push_back(pair_record(j, 1e-6, 0, 0));
  EXPECT_FALSE(monitor_theorem3(flat, 0.1, 1e-3).pass);
}

TEST(ErrorDecay, LinearProgramMatchesVertexEnumeration) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double nu = 0.1, eps = 1e-2, eps2 = eps * eps;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<PairRecord> pair;
    double cum = 0.0;
    for (int j = 0; j < 12; ++j) {
      const double phi = j == 0 ? eps2 : eps2 * (0.2 + 3.0 * uni(rng));
      pair.push_back(pair_record(j, phi, 0, cum));
      cum += 1e-4 * uni(rng);
    }
    const TheoremReport rep = monitor_theorem3(pair, nu, eps);
    const double got = rep.constants.at("C1") + rep.constants.at("C2");

    // Brute force: every intersection of two constraint lines (axes included).
    std::vector<std::array<double, 3>> lines;  // a C1 + b C2 = y
    for (const auto& r : pair) lines.push_back({eps2, r.cum_forcing_hs / nu, r.phi_l2_sq});
    lines.push_back({1, 0, 0});
    lines.push_back({0, 1, 0});
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lines.size(); ++i)
      for (std::size_t k = i + 1; k < lines.size(); ++k) {
        const auto& p = lines[i];
        const auto& q = lines[k];
        const double det = p[0] * q[1] - p[1] * q[0];
        if (std::abs(det) < 1e-300) continue;
        const double c1 = (p[2] * q[1] - p[1] * q[2]) / det;
        const double c2 = (p[0] * q[2] - p[2] * q[0]) / det;
        if (c1 < -1e-12 || c2 < -1e-12) continue;
        bool feasible = true;
        for (const auto& r : pair)
          feasible = feasible && eps2 * c1 + r.cum_forcing_hs / nu * c2 >= r.phi_l2_sq * (1 - 1e-12);
        if (feasible) best = std::min(best, c1 + c2);
      }
    EXPECT_NEAR(got, best, 1e-9 * best) << "trial " << trial;
    EXPECT_EQ(rep.satisfaction_fraction, 1.0);
    EXPECT_TRUE(rep.pass);
  }
}

TEST(Reports, JsonIsDeterministic) {
  const auto recs = tg_records(0.1, 2.0, 1.0, 11);
  const Json a = to_json(monitor_theorem1(recs, 2.0));
  const Json b = to_json(monitor_theorem1(recs, 2.0));
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a["theorem_id"], "T1");
  EXPECT_TRUE(a.contains("tool_version"));
  EXPECT_EQ(a["decay_rate"], "not applicable");
}
