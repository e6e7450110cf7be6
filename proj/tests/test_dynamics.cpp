#include <gtest/gtest.h>

#include <cmath>

#include "dynbench/dynamics.hpp"
#include "dynbench/scenarios.hpp"

using namespace dynbench;

namespace {

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

// Integrates dy/dt = -y from 1 to t = 1 and returns |y - e^-1|.
double decay_error(double dt) {
  const auto rhs = [](const Eigen::VectorXd& y) -> Eigen::VectorXd { return -y; };
  Eigen::VectorXd y = v1(1.0);
  const int steps = static_cast<int>(std::lround(1.0 / dt));
  for (int k = 0; k < steps; ++k) y = rk4_step(rhs, y, dt, k);
  return std::abs(y(0) - std::exp(-1.0));
}

SystemSpec small_spec(Family family, ParamMap params, int dim, double dt, std::int64_t steps) {
  SystemSpec s;
  s.family = family;
  s.params = std::move(params);
  s.dim = dim;
  s.dt = dt;
  s.n_steps = steps;
  s.initial_cond = Eigen::VectorXd::Zero(dim);
  s.method = default_method(family);
  return s;
}

}  // namespace

TEST(Rhs, LorenzAtOnes) {
  const ParamMap p{{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}};
  const Eigen::Vector3d y(1, 1, 1);
  const Eigen::VectorXd d = system_rhs(Family::Lorenz63, p, y);
  EXPECT_DOUBLE_EQ(d(0), 0.0);
  EXPECT_DOUBLE_EQ(d(1), 26.0);
  EXPECT_NEAR(d(2), -5.0 / 3.0, 1e-15);
}

TEST(Rhs, FixedPoints) {
  EXPECT_EQ(system_rhs(Family::OU, {{"theta", 0.2}, {"mu", 0.0}, {"sigma", 0.3}}, v1(0.0))(0), 0.0);
  EXPECT_NEAR(system_rhs(Family::DoubleWell, {{"a", 1.5}, {"sigma", 0.25}}, v1(std::sqrt(1.5)))(0), 0.0, 1e-14);
}

TEST(Rhs, Errors) {
  EXPECT_THROW(system_rhs(Family::Lorenz63, {{"sigma", 10.0}, {"rho", 28.0}}, Eigen::Vector3d(1, 1, 1)),
               ConfigError);
  EXPECT_THROW(system_rhs(Family::Lorenz63, {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 1.0}}, Eigen::Vector2d(1, 1)),
               DimensionError);
}

TEST(Rk4, HandStep) {
  const auto rhs = [](const Eigen::VectorXd& y) -> Eigen::VectorXd { return -y; };
  // k1..k4 = -1, -0.95, -0.9525, -0.90475
  const double hand = 1.0 + 0.1 / 6.0 * (-1.0 - 2 * 0.95 - 2 * 0.9525 - 0.90475);
  EXPECT_NEAR(rk4_step(rhs, v1(1.0), 0.1)(0), hand, 1e-15);
  EXPECT_NEAR(hand, 0.9048375, 1e-7);
}

TEST(Rk4, ConstantSolution) {
  const auto rhs = [](const Eigen::VectorXd& y) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(y.size()); };
  EXPECT_EQ(rk4_step(rhs, v1(3.25), 0.7)(0), 3.25);
}

TEST(Rk4, TenStepsMatchAmplificationFactor) {
  // One RK4 step on y' = -y multiplies by 1 - h + h^2/2 - h^3/6 + h^4/24, so
  // ten steps of 0.1 land 3.3e-7 above e^-1.
  const double g = 1.0 - 0.1 + 0.01 / 2 - 0.001 / 6 + 0.0001 / 24;
  const double expected = std::abs(std::pow(g, 10) - std::exp(-1.0));
  EXPECT_NEAR(decay_error(0.1), expected, 1e-15);
  EXPECT_LT(decay_error(0.1), 1e-6);
}

TEST(Rk4, FourthOrder) {
  const double ratio = decay_error(0.1) / decay_error(0.05);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(Rk4, BlowupCarriesStep) {
  const auto rhs = [](const Eigen::VectorXd& y) -> Eigen::VectorXd { return y.array().square() * 1e308; };
  try {
    rk4_step(rhs, v1(10.0), 1.0, 17);
    FAIL() << "expected a blowup";
  } catch (const BlowupError& e) {
    EXPECT_EQ(e.step(), 17);
  }
}

TEST(EulerMaruyama, ZeroDiffusionIsEuler) {
  const auto drift = [](const Eigen::VectorXd& y) -> Eigen::VectorXd { return -2.0 * y; };
  Rng rng(1);
  EXPECT_DOUBLE_EQ(em_step(drift, 0.0, v1(1.0), 0.1, rng)(0), 0.8);
}

TEST(EulerMaruyama, Deterministic) {
  auto spec = find_scenario("OU_BASE").spec;
  spec.n_steps = 500;
  const auto a = simulate(spec, {});
  const auto b = simulate(spec, {});
  EXPECT_TRUE(a.values == b.values);
  const auto c = simulate(spec, {}, 1);
  EXPECT_FALSE(a.values == c.values);
}

TEST(Discrete, SldsRegimeTwoUpdate) {
  const ParamMap p{{"A1", 0.83}, {"Q1", 0.05}, {"A2", 0.9}, {"Q2", 0.35}, {"p11", 0.94}, {"p22", 0.95}};
  DiscreteState s;
  s.x = 1.0;
  s.regime = 1;
  // uniform below p22 keeps the chain in its current regime
  const auto n = discrete_update(Family::SLDS, p, s, 0, {0.1, 0.0});
  EXPECT_EQ(n.regime, 1);
  EXPECT_DOUBLE_EQ(n.x, 0.9);
}

TEST(Discrete, GarchVariance) {
  const ParamMap p{{"omega", 0.01}, {"alpha", 0.06}, {"beta", 0.90}};
  DiscreteState s;
  s.x = 0.0;
  s.variance = 0.1;
  EXPECT_NEAR(discrete_update(Family::GARCH, p, s, 5, {0.5, 0.0}).variance, 0.1, 1e-15);
}

TEST(Discrete, SeasonalStart) {
  const ParamMap p{{"S", 24.0}, {"phi", 0.5}, {"sigma", 0.2}, {"a0", 1.0}, {"amp_drift_per_step", 0.0}};
  EXPECT_DOUBLE_EQ(discrete_update(Family::SeasonalAR, p, {}, 0, {0.5, 0.0}).x, 1.0);
}

TEST(Discrete, ProbabilityOutOfRange) {
  const ParamMap p{{"A1", 0.9}, {"Q1", 0.05}, {"A2", 0.98}, {"Q2", 0.35}, {"p11", 1.2}, {"p22", 0.95}};
  EXPECT_THROW(discrete_update(Family::SLDS, p, {}, 0, {}), ConfigError);
}

TEST(Discrete, SldsOccupancyMatchesStationaryLaw) {
  const auto& p = find_scenario("SLDS_BASE").spec.params;
  const double p11 = p.at("p11"), p22 = p.at("p22");
  const double pi0 = (1.0 - p22) / (2.0 - p11 - p22);
  Rng rng(2024);
  DiscreteState s;
  const int n = 100000;
  int in0 = 0;
  for (int t = 0; t < n; ++t) {
    s = discrete_step(Family::SLDS, p, s, t, rng);
    in0 += s.regime == 0;
  }
  EXPECT_NEAR(static_cast<double>(in0) / n, pi0, 0.02);
}

TEST(Simulate, LorenzMainLengthAndFinite) {
  const auto& sc = find_scenario("LORENZ63_MAIN");
  EXPECT_EQ(sc.spec.n_steps, 25000);
  EXPECT_DOUBLE_EQ(sc.spec.dt, 0.01);
  const auto t = simulate(sc.spec, sc.shock);
  EXPECT_EQ(t.values.rows(), 25000);
  EXPECT_EQ(t.values.cols(), 3);
  EXPECT_TRUE(t.values.allFinite());
}

TEST(Simulate, NoneShockMatchesBase) {
  const auto& sc = find_scenario("ROSSLER_BASE");
  ShockSpec none;
  none.kind = ShockKind::None;
  EXPECT_TRUE(simulate(sc.spec, none).values == simulate(sc.spec, {}).values);
}

TEST(Simulate, LorenzParamShockPrefix) {
  const auto& base = find_scenario("LORENZ_BASE");
  const auto& shocked = find_scenario("LORENZ_PARAM");
  const auto a = simulate(base.spec, base.shock);
  const auto b = simulate(shocked.spec, shocked.shock);
  ASSERT_TRUE(b.shock_step.has_value());
  EXPECT_EQ(*b.shock_step, 12599);
  EXPECT_DOUBLE_EQ(shocked.shock.param_updates.at("sigma"), 10.1);
  EXPECT_DOUBLE_EQ(shocked.shock.param_updates.at("rho"), 28.1);
  EXPECT_DOUBLE_EQ(shocked.shock.param_updates.at("beta"), 8.1 / 3.0);
  const auto k = *b.shock_step;
  EXPECT_TRUE(a.values.topRows(k) == b.values.topRows(k));
  EXPECT_FALSE(a.values.row(k) == b.values.row(k));
}

TEST(Simulate, ShockPrefixAllKinds) {
  for (const char* id : {"LORENZ_STATE", "LORENZ_SWITCH", "OU_PARAM", "SLDS_SWITCH", "GARCH_PARAM", "DOUBLEWELL_SWITCH"}) {
    SCOPED_TRACE(id);
    const auto& sc = find_scenario(id);
    auto spec = sc.spec;
    spec.n_steps = 3000;
    const auto a = simulate(spec, {});
    const auto b = simulate(spec, sc.shock);
    const auto k = *b.shock_step;
    EXPECT_EQ(k, static_cast<std::int64_t>(std::floor(0.35 * 3000)));
    EXPECT_TRUE(a.values.topRows(k) == b.values.topRows(k));
    EXPECT_TRUE(b.values.allFinite());
  }
}

TEST(Simulate, StateEpsAddsToEveryCoordinate) {
  auto spec = small_spec(Family::Lorenz63, {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}}, 3, 0.01, 100);
  spec.initial_cond = Eigen::Vector3d(1.0, 0.98, 1.1);
  ShockSpec s;
  s.kind = ShockKind::StateEps;
  s.state_eps = 0.9;
  s.shock_frac = 0.5;
  const auto a = simulate(spec, {});
  const auto b = simulate(spec, s);
  // one step after the shock the state was advanced from a shifted point
  const auto drift = [&](const Eigen::VectorXd& y) { return system_rhs(spec.family, spec.params, y); };
  EXPECT_TRUE(a.values.row(49) == b.values.row(49));
  const Eigen::VectorXd from = a.values.row(49).transpose().array() + 0.9;
  EXPECT_TRUE(rk4_step(drift, from, 0.01) == b.values.row(50).transpose());
}

TEST(Simulate, DoubleWellBimodal) {
  const auto& sc = find_scenario("DOUBLEWELL_BASE");
  const auto t = simulate(sc.spec, sc.shock);
  const auto x = t.values.col(0).array();
  const double pos = (x > 0).cast<double>().mean();
  EXPECT_GE(pos, 0.1);
  EXPECT_GE(1.0 - pos, 0.1);
}

TEST(Simulate, EveryScenarioFinite) {
  for (const auto& sc : scenario_registry()) {
    SCOPED_TRACE(sc.id);
    auto spec = sc.spec;
    spec.n_steps = std::min<std::int64_t>(spec.n_steps, 4000);
    EXPECT_TRUE(simulate(spec, sc.shock).values.allFinite());
  }
}

TEST(Spec, Invariants) {
  auto s = small_spec(Family::OU, {{"theta", 0.2}, {"mu", 0.0}, {"sigma", 0.3}}, 1, 0.5, 10);
  EXPECT_NO_THROW(s.validate());
  s.dt = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.dt = 0.5;
  s.method = Method::RK4;
  EXPECT_THROW(s.validate(), ConfigError);
  s.method = Method::EulerMaruyama;
  s.dim = 2;
  s.initial_cond = Eigen::VectorXd::Zero(2);
  EXPECT_THROW(s.validate(), DimensionError);

  ShockSpec p;
  p.kind = ShockKind::Param;
  EXPECT_THROW(p.validate(find_scenario("OU_BASE").spec), ConfigError);
}
