#include "dynbench/scenarios.hpp"

namespace dynbench {

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

SystemSpec system(Family family, ParamMap params, double dt, std::int64_t steps, Eigen::VectorXd ic) {
  SystemSpec s;
  s.family = family;
  s.params = std::move(params);
  s.dim = static_cast<int>(ic.size());
  s.dt = dt;
  s.n_steps = steps;
  s.initial_cond = std::move(ic);
  s.method = default_method(family);
  return s;
}

ShockSpec param_shock(ParamMap updates) {
  ShockSpec s;
  s.kind = ShockKind::Param;
  s.param_updates = std::move(updates);
  return s;
}

ShockSpec switch_shock(ParamMap updates, std::optional<Eigen::VectorXd> state = std::nullopt) {
  ShockSpec s;
  s.kind = ShockKind::Switch;
  s.param_updates = std::move(updates);
  s.switch_state = std::move(state);
  return s;
}

std::vector<Scenario> build() {
  const ParamMap lorenz{{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}};
  const ParamMap rossler{{"a", 0.2}, {"b", 0.2}, {"c", 5.7}};
  const ParamMap chua{{"alpha", 15.6}, {"beta", 28.0}, {"m0", -8.0 / 7.0}, {"m1", -5.0 / 7.0}};
  const ParamMap l96{{"dim", 6.0}, {"forcing", 8.0}};
  const ParamMap ou{{"theta", 0.2}, {"mu", 0.0}, {"sigma", 0.3}};
  const ParamMap slds{{"A1", 0.9}, {"Q1", 0.05}, {"A2", 0.98}, {"Q2", 0.35}, {"p11", 0.94}, {"p22", 0.95}};
  const ParamMap dw{{"a", 1.5}, {"sigma", 0.25}};
  const ParamMap sar{{"S", 24.0}, {"phi", 0.5}, {"sigma", 0.2}, {"a0", 1.0}, {"amp_drift_per_step", 0.0}};
  const ParamMap garch{{"omega", 0.01}, {"alpha", 0.06}, {"beta", 0.90}};

  const auto lorenz_ic = vec({1.0, 0.98, 1.1});
  const auto chua_ic = vec({0.1, 0.0, 0.0});
  const auto l96_ic = vec({1.01, 1.0, 1.0, 1.0, 1.0, 1.0});
  const auto zero = vec({0.0});

  std::vector<Scenario> r;
  r.push_back({"LORENZ63_MAIN", system(Family::Lorenz63, lorenz, 0.01, 25000, lorenz_ic), {}});
  r.push_back({"ROSSLER_MAIN", system(Family::Rossler, rossler, 0.01, 25000, lorenz_ic), {}});
  r.push_back({"CHUA_MAIN", system(Family::Chua, chua, 0.005, 35000, chua_ic), {}});

  r.push_back({"LORENZ_BASE", system(Family::Lorenz63, lorenz, 0.01, 35999, lorenz_ic), {}});
  r.push_back({"LORENZ_PARAM", system(Family::Lorenz63, lorenz, 0.01, 35999, lorenz_ic),
               param_shock({{"sigma", 10.1}, {"rho", 28.1}, {"beta", 8.1 / 3.0}})});
  {
    ShockSpec s;
    s.kind = ShockKind::StateEps;
    s.state_eps = 0.9;
    r.push_back({"LORENZ_STATE", system(Family::Lorenz63, lorenz, 0.01, 35999, lorenz_ic), s});
  }
  r.push_back({"LORENZ_SWITCH", system(Family::Lorenz63, lorenz, 0.01, 35999, lorenz_ic),
               switch_shock({{"rho", 28.1}}, vec({1.002, 0.982, 1.102}))});

  r.push_back({"ROSSLER_BASE", system(Family::Rossler, rossler, 0.01, 35999, lorenz_ic), {}});
  r.push_back({"ROSSLER_PARAM", system(Family::Rossler, rossler, 0.01, 35999, lorenz_ic),
               param_shock({{"a", 0.25}, {"b", 0.25}, {"c", 5.75}})});

  r.push_back({"LORENZ96_BASE", system(Family::Lorenz96, l96, 0.007, 55000, l96_ic), {}});
  r.push_back({"LORENZ96_SWITCH", system(Family::Lorenz96, l96, 0.007, 55000, l96_ic),
               switch_shock({{"forcing", 9.0}}, vec({0.99, 1.02, 1.02, 1.03, 1.01, 1.01}))});

  r.push_back({"CHUA_BASE", system(Family::Chua, chua, 0.005, 35999, chua_ic), {}});
  r.push_back({"CHUA_PARAM", system(Family::Chua, chua, 0.005, 35999, chua_ic),
               param_shock({{"alpha", 15.9}, {"beta", 28.5}, {"m0", -8.1 / 7.0}, {"m1", -5.2 / 7.0}})});
  r.push_back({"CHUA_SWITCH", system(Family::Chua, chua, 0.005, 35999, chua_ic),
               switch_shock({}, vec({0.11, 0.01, 0.02}))});

  r.push_back({"OU_BASE", system(Family::OU, ou, 0.5, 25000, zero), {}});
  r.push_back({"OU_PARAM", system(Family::OU, ou, 0.5, 25000, zero), param_shock({{"mu", 0.5}})});

  r.push_back({"SLDS_BASE", system(Family::SLDS, slds, 0.01, 25000, zero), {}});
  r.push_back({"SLDS_PARAM", system(Family::SLDS, slds, 0.01, 25000, zero),
               param_shock({{"A1", 0.83}, {"Q1", 0.50}, {"A2", 0.97}, {"Q2", 0.30}, {"p11", 0.96}, {"p22", 0.92}})});
  r.push_back({"SLDS_SWITCH", system(Family::SLDS, slds, 0.01, 25000, zero),
               switch_shock({{"A1", 0.87}, {"Q1", 0.07}, {"A2", 0.99}, {"Q2", 0.45}, {"p11", 0.90}, {"p22", 0.95}})});

  r.push_back({"DOUBLEWELL_BASE", system(Family::DoubleWell, dw, 0.5, 25000, zero), {}});
  r.push_back({"DOUBLEWELL_PARAM", system(Family::DoubleWell, dw, 0.5, 25000, zero),
               param_shock({{"a", 1.0}, {"sigma", 0.35}})});
  r.push_back({"DOUBLEWELL_SWITCH", system(Family::DoubleWell, dw, 0.5, 25000, zero),
               switch_shock({{"a", 1.0}, {"sigma", 0.35}})});

  r.push_back({"SEASONAL_AR_BASE", system(Family::SeasonalAR, sar, 0.01, 25000, zero), {}});
  r.push_back({"SEASONAL_AR_PARAM", system(Family::SeasonalAR, sar, 0.01, 25000, zero),
               param_shock({{"a0", 1.4}, {"sigma", 0.35}, {"phi", 0.8}})});

  r.push_back({"GARCH_BASE", system(Family::GARCH, garch, 0.01, 25000, zero), {}});
  r.push_back({"GARCH_PARAM", system(Family::GARCH, garch, 0.01, 25000, zero),
               param_shock({{"omega", 0.03}, {"alpha", 0.15}, {"beta", 0.70}})});

  for (const auto& s : r) {
    s.spec.validate();
    s.shock.validate(s.spec);
  }
  return r;
}

}  // namespace

const std::vector<Scenario>& scenario_registry() {
  static const std::vector<Scenario> registry = build();
  return registry;
}

std::vector<std::string> scenario_ids() {
  std::vector<std::string> ids;
  for (const auto& s : scenario_registry()) ids.push_back(s.id);
  return ids;
}

const Scenario& find_scenario(std::string_view id) {
  for (const auto& s : scenario_registry())
    if (s.id == id) return s;
  if (id == "KS_BASE" || id == "KS_PARAM")
    throw ConfigError(std::string(id) +
                      " is out of scope: the Kuramoto-Sivashinsky system (ETDRK4 PDE solver) is not "
                      "implemented by this benchmark");
  std::string msg = "unknown scenario '" + std::string(id) + "'; available:";
  for (const auto& s : scenario_registry()) msg += " " + s.id;
  throw ConfigError(msg);
}

}  // namespace dynbench
