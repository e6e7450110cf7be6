#include "dynbench/dynamics.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace dynbench {

namespace {

struct FamilyInfo {
  Family family;
  std::string_view name;
  Method method;
  std::vector<std::string> params;
};

const std::array<FamilyInfo, 9>& family_table() {
  static const std::array<FamilyInfo, 9> table = {{
      {Family::Lorenz63, "lorenz63", Method::RK4, {"sigma", "rho", "beta"}},
      {Family::Rossler, "rossler", Method::RK4, {"a", "b", "c"}},
      {Family::Chua, "chua", Method::RK4, {"alpha", "beta", "m0", "m1"}},
      {Family::Lorenz96, "lorenz96", Method::RK4, {"dim", "forcing"}},
      {Family::OU, "ou", Method::EulerMaruyama, {"theta", "mu", "sigma"}},
      {Family::DoubleWell, "doublewell", Method::EulerMaruyama, {"a", "sigma"}},
      {Family::SLDS, "slds", Method::Discrete, {"A1", "Q1", "A2", "Q2", "p11", "p22"}},
      {Family::SeasonalAR, "seasonal_ar", Method::Discrete,
       {"S", "phi", "sigma", "a0", "amp_drift_per_step"}},
      {Family::GARCH, "garch", Method::Discrete, {"omega", "alpha", "beta"}},
  }};
  return table;
}

const FamilyInfo& info(Family family) {
  for (const auto& row : family_table())
    if (row.family == family) return row;
  throw ConfigError("unknown family");
}

void check_probability(const ParamMap& params, const char* name) {
  const double p = detail::require(params, name);
  if (!(p >= 0.0 && p <= 1.0))
    throw ConfigError(std::string("probability '") + name + "' outside [0,1]");
}

void validate_params(Family family, const ParamMap& params) {
  for (const auto& name : required_params(family)) detail::require(params, name);
  if (family == Family::SLDS) {
    check_probability(params, "p11");
    check_probability(params, "p22");
    if (detail::require(params, "Q1") < 0 || detail::require(params, "Q2") < 0)
      throw ConfigError("SLDS noise variances must be nonnegative");
  }
  if (family == Family::GARCH) {
    const double omega = detail::require(params, "omega");
    const double alpha = detail::require(params, "alpha");
    const double beta = detail::require(params, "beta");
    if (omega <= 0 || alpha < 0 || beta < 0 || alpha + beta >= 1)
      throw ConfigError("GARCH requires omega > 0, alpha, beta >= 0 and alpha + beta < 1");
  }
  if (family == Family::SeasonalAR && detail::require(params, "S") <= 0)
    throw ConfigError("seasonal period S must be positive");
}

}  // namespace

std::string_view to_string(Family family) { return info(family).name; }

std::string_view to_string(Method method) {
  switch (method) {
    case Method::RK4:
      return "rk4";
    case Method::EulerMaruyama:
      return "euler";
    case Method::Discrete:
      return "discrete";
  }
  return "?";
}

Family family_from_string(std::string_view name) {
  for (const auto& row : family_table())
    if (row.name == name) return row.family;
  throw ConfigError("unknown system family '" + std::string(name) + "'");
}

const std::vector<std::string>& required_params(Family family) { return info(family).params; }

Method default_method(Family family) { return info(family).method; }

bool is_stochastic(Family family) { return default_method(family) != Method::RK4; }

std::string_view to_string(ShockKind kind) {
  switch (kind) {
    case ShockKind::None:
      return "none";
    case ShockKind::Param:
      return "param";
    case ShockKind::StateEps:
      return "state_eps";
    case ShockKind::Switch:
      return "switch";
  }
  return "?";
}

ShockKind shock_kind_from_string(std::string_view name) {
  for (auto kind : {ShockKind::None, ShockKind::Param, ShockKind::StateEps, ShockKind::Switch})
    if (to_string(kind) == name) return kind;
  throw ConfigError("unknown shock kind '" + std::string(name) + "'");
}

void SystemSpec::validate() const {
  validate_params(family, params);
  const int expected = detail::expected_dim(family, params);
  if (dim != expected)
    throw DimensionError(std::string(to_string(family)) + " has dimension " +
                         std::to_string(expected) + ", spec says " + std::to_string(dim));
  if (initial_cond.size() != dim)
    throw DimensionError("initial_cond has length " + std::to_string(initial_cond.size()) +
                         ", expected " + std::to_string(dim));
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (n_steps <= 0) throw ConfigError("n_steps must be positive");
  if (method != default_method(family))
    throw ConfigError(std::string(to_string(family)) + " must be integrated with " +
                      std::string(to_string(default_method(family))));
  if (!initial_cond.allFinite()) throw ConfigError("initial_cond must be finite");
}

void ShockSpec::validate(const SystemSpec& spec) const {
  if (!(shock_frac >= 0.0 && shock_frac <= 1.0)) throw ConfigError("shock_frac outside [0,1]");
  if (kind == ShockKind::Param && param_updates.empty())
    throw ConfigError("param shock requires parameter updates");
  for (const auto& [name, value] : param_updates) {
    (void)value;
    if (!spec.params.contains(name))
      throw ConfigError("shock updates unknown parameter '" + name + "'");
  }
  if (kind == ShockKind::Switch && param_updates.empty() && !switch_state)
    throw ConfigError("switch shock requires parameter updates or a switch state");
  if (switch_state && switch_state->size() != spec.dim)
    throw DimensionError("switch_state length does not match system dimension");
  if (!param_updates.empty()) {
    ParamMap merged = spec.params;
    for (const auto& [name, value] : param_updates) merged[name] = value;
    validate_params(spec.family, merged);
    if (detail::expected_dim(spec.family, merged) != spec.dim)
      throw DimensionError("shock may not change the system dimension");
  }
}

std::optional<std::int64_t> ShockSpec::step(std::int64_t n_steps) const {
  if (kind == ShockKind::None) return std::nullopt;
  return static_cast<std::int64_t>(std::floor(shock_frac * static_cast<double>(n_steps)));
}

double system_diffusion(Family family, const ParamMap& params) {
  switch (family) {
    case Family::OU:
    case Family::DoubleWell:
      return detail::require(params, "sigma");
    default:
      return 0.0;
  }
}

DiscreteState discrete_update(Family family, const ParamMap& params, const DiscreteState& state,
                              std::int64_t t, const DiscreteDraws& draws) {
  const auto p = [&](const char* name) { return detail::require(params, name); };
  DiscreteState next = state;
  switch (family) {
    case Family::SLDS: {
      check_probability(params, "p11");
      check_probability(params, "p22");
      const double stay = state.regime == 0 ? p("p11") : p("p22");
      next.regime = draws.uniform < stay ? state.regime : 1 - state.regime;
      const double a = next.regime == 0 ? p("A1") : p("A2");
      const double q = next.regime == 0 ? p("Q1") : p("Q2");
      next.x = a * state.x + std::sqrt(q) * draws.normal;
      break;
    }
    case Family::SeasonalAR: {
      const double amplitude = p("a0") + static_cast<double>(t) * p("amp_drift_per_step");
      const double season = std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / p("S"));
      next.x = amplitude * season + p("phi") * state.x + p("sigma") * draws.normal;
      break;
    }
    case Family::GARCH: {
      next.variance = p("omega") + p("alpha") * state.x * state.x + p("beta") * state.variance;
      next.x = std::sqrt(next.variance) * draws.normal;
      break;
    }
    default:
      throw ConfigError(std::string(to_string(family)) + " is not a discrete-time family");
  }
  return next;
}

DiscreteState discrete_step(Family family, const ParamMap& params, const DiscreteState& state,
                            std::int64_t t, Rng& rng) {
  DiscreteDraws draws;
  if (family == Family::SLDS) draws.uniform = rng.uniform();
  draws.normal = rng.normal();
  return discrete_update(family, params, state, t, draws);
}

DiscreteState initial_discrete_state(const SystemSpec& spec) {
  DiscreteState s;
  s.x = spec.initial_cond(0);
  if (spec.family == Family::GARCH) {
    const double omega = detail::require(spec.params, "omega");
    const double alpha = detail::require(spec.params, "alpha");
    const double beta = detail::require(spec.params, "beta");
    s.variance = omega / (1.0 - alpha - beta);
  }
  return s;
}

Trajectory simulate(const SystemSpec& spec, const ShockSpec& shock, std::uint64_t realization) {
  spec.validate();
  shock.validate(spec);

  Trajectory traj;
  traj.spec = spec;
  traj.shock = shock;
  traj.shock_step = shock.step(spec.n_steps);
  traj.values.resize(spec.n_steps, spec.dim);

  Rng rng(spec.rng_seed, stream_id(StreamPurpose::Dynamics, realization));
  ParamMap params = spec.params;
  const std::string name(to_string(spec.family));
  const bool discrete = spec.method == Method::Discrete;

  Eigen::VectorXd state = spec.initial_cond;
  DiscreteState dstate = discrete ? initial_discrete_state(spec) : DiscreteState{};

  for (std::int64_t k = 0; k < spec.n_steps; ++k) {
    if (traj.shock_step && k == *traj.shock_step) {
      for (const auto& [key, value] : shock.param_updates) params[key] = value;
      if (shock.kind == ShockKind::StateEps) {
        state.array() += shock.state_eps;
        dstate.x += shock.state_eps;
      }
      if (shock.kind == ShockKind::Switch && shock.switch_state) {
        state = *shock.switch_state;
        dstate.x = (*shock.switch_state)(0);
      }
    }

    try {
      if (discrete) {
        dstate = discrete_step(spec.family, params, dstate, k, rng);
        if (!std::isfinite(dstate.x)) throw BlowupError(name, k);
        traj.values(k, 0) = dstate.x;
        continue;
      }
      const auto drift = [&](const Eigen::VectorXd& y) {
        return system_rhs(spec.family, params, y);
      };
      if (spec.method == Method::RK4) {
        state = rk4_step(drift, state, spec.dt, k);
      } else {
        state = em_step(drift, system_diffusion(spec.family, params), state, spec.dt, rng, k);
      }
    } catch (const BlowupError&) {
      throw BlowupError(name, k);
    }
    traj.values.row(k) = state.transpose();
  }
  return traj;
}

}  // namespace dynbench
