#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynbench/error.hpp"
#include "dynbench/rng.hpp"

namespace dynbench {

enum class Family { Lorenz63, Rossler, Chua, Lorenz96, OU, DoubleWell, SLDS, SeasonalAR, GARCH };
enum class Method { RK4, EulerMaruyama, Discrete };

using ParamMap = std::map<std::string, double>;

std::string_view to_string(Family family);
std::string_view to_string(Method method);
Family family_from_string(std::string_view name);

/// Parameter names each family requires.
const std::vector<std::string>& required_params(Family family);
Method default_method(Family family);
bool is_stochastic(Family family);

struct SystemSpec {
  Family family = Family::Lorenz63;
  ParamMap params;
  int dim = 3;
  double dt = 0.01;
  std::int64_t n_steps = 0;
  Eigen::VectorXd initial_cond;
  Method method = Method::RK4;
  std::uint64_t rng_seed = 1955;

  /// Throws ConfigError / DimensionError when an invariant is broken.
  void validate() const;
};

enum class ShockKind { None, Param, StateEps, Switch };

std::string_view to_string(ShockKind kind);
ShockKind shock_kind_from_string(std::string_view name);

struct ShockSpec {
  ShockKind kind = ShockKind::None;
  double shock_frac = 0.35;
  ParamMap param_updates;
  /// Added to every state coordinate at the shock step.
  double state_eps = 0.0;
  std::optional<Eigen::VectorXd> switch_state;

  void validate(const SystemSpec& spec) const;
  /// floor(shock_frac * n_steps), or nullopt for kind None.
  std::optional<std::int64_t> step(std::int64_t n_steps) const;
};

struct Trajectory {
  /// n_steps x dim, row k is the state after integration step k + 1.
  Eigen::MatrixXd values;
  SystemSpec spec;
  ShockSpec shock;
  std::optional<std::int64_t> shock_step;
};

// ---------------------------------------------------------------------------
// Continuous-time right-hand sides.

namespace detail {

inline double require(const ParamMap& params, const std::string& name) {
  const auto it = params.find(name);
  if (it == params.end()) throw ConfigError("missing parameter '" + name + "'");
  return it->second;
}

inline int expected_dim(Family family, const ParamMap& params) {
  switch (family) {
    case Family::Lorenz63:
    case Family::Rossler:
    case Family::Chua:
      return 3;
    case Family::Lorenz96: {
      const double d = require(params, "dim");
      if (d < 4 || d != std::floor(d)) throw ConfigError("Lorenz96 dim must be an integer >= 4");
      return static_cast<int>(d);
    }
    default:
      return 1;
  }
}

}  // namespace detail

/// Time derivative of a deterministic ODE family, or the drift of an SDE family.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> system_rhs(
    Family family, const ParamMap& params, const Eigen::MatrixBase<Derived>& state) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const auto p = [&](const char* name) { return Scalar(detail::require(params, name)); };

  const int dim = detail::expected_dim(family, params);
  if (state.size() != dim) {
    throw DimensionError(std::string(to_string(family)) + " expects state of length " +
                         std::to_string(dim) + ", got " + std::to_string(state.size()));
  }
  Vec out(dim);
  switch (family) {
    case Family::Lorenz63: {
      const Scalar sigma = p("sigma"), rho = p("rho"), beta = p("beta");
      out << sigma * (state(1) - state(0)), state(0) * (rho - state(2)) - state(1),
          state(0) * state(1) - beta * state(2);
      break;
    }
    case Family::Rossler: {
      const Scalar a = p("a"), b = p("b"), c = p("c");
      out << -state(1) - state(2), state(0) + a * state(1), b + state(2) * (state(0) - c);
      break;
    }
    case Family::Chua: {
      const Scalar alpha = p("alpha"), beta = p("beta"), m0 = p("m0"), m1 = p("m1");
      using std::abs;
      const Scalar x = state(0);
      const Scalar h = m1 * x + Scalar(0.5) * (m0 - m1) * (abs(x + Scalar(1)) - abs(x - Scalar(1)));
      out << alpha * (state(1) - x - h), x - state(1) + state(2), -beta * state(1);
      break;
    }
    case Family::Lorenz96: {
      const Scalar forcing = p("forcing");
      for (int j = 0; j < dim; ++j) {
        const Scalar xp1 = state((j + 1) % dim);
        const Scalar xm1 = state((j + dim - 1) % dim);
        const Scalar xm2 = state((j + dim - 2) % dim);
        out(j) = (xp1 - xm2) * xm1 - state(j) + forcing;
      }
      break;
    }
    case Family::OU:
      out(0) = p("theta") * (p("mu") - state(0));
      break;
    case Family::DoubleWell:
      out(0) = p("a") * state(0) - state(0) * state(0) * state(0);
      break;
    default:
      throw ConfigError(std::string(to_string(family)) + " is a discrete-time family");
  }
  return out;
}

/// Diffusion coefficient of an SDE family (scalar noise per coordinate).
double system_diffusion(Family family, const ParamMap& params);

// ---------------------------------------------------------------------------
// Single-step integrators.

/// Classical fourth-order Runge-Kutta step.
template <typename Rhs>
Eigen::VectorXd rk4_step(Rhs&& rhs, const Eigen::VectorXd& y, double dt, std::int64_t step = -1) {
  const Eigen::VectorXd k1 = rhs(y);
  const Eigen::VectorXd k2 = rhs((y + 0.5 * dt * k1).eval());
  const Eigen::VectorXd k3 = rhs((y + 0.5 * dt * k2).eval());
  const Eigen::VectorXd k4 = rhs((y + dt * k3).eval());
  Eigen::VectorXd next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw BlowupError("rk4", step);
  return next;
}

/// Euler-Maruyama step: y + drift(y) dt + diffusion sqrt(dt) xi.
template <typename Drift>
Eigen::VectorXd em_step(Drift&& drift, double diffusion, const Eigen::VectorXd& y, double dt,
                        Rng& rng, std::int64_t step = -1) {
  Eigen::VectorXd next = y + dt * drift(y);
  const double scale = diffusion * std::sqrt(dt);
  for (Eigen::Index i = 0; i < next.size(); ++i) next(i) += scale * rng.normal();
  if (!next.allFinite()) throw BlowupError("euler-maruyama", step);
  return next;
}

// ---------------------------------------------------------------------------
// Discrete-time recursions.

struct DiscreteState {
  double x = 0.0;
  /// GARCH conditional variance sigma^2_{t-1}; unused otherwise.
  double variance = 0.0;
  /// SLDS regime, 0 or 1; unused otherwise.
  int regime = 0;
};

/// Random inputs of one discrete step, exposed so the recursions can be
/// checked with fixed draws.
struct DiscreteDraws {
  double uniform = 0.5;
  double normal = 0.0;
};

/// Applies one step of SLDS / SeasonalAR / GARCH at time index t. SLDS draws
/// the regime transition first, then applies the linear update of the new
/// regime.
DiscreteState discrete_update(Family family, const ParamMap& params, const DiscreteState& state,
                              std::int64_t t, const DiscreteDraws& draws);

DiscreteState discrete_step(Family family, const ParamMap& params, const DiscreteState& state,
                            std::int64_t t, Rng& rng);

/// Initial hidden state: x = initial_cond(0), GARCH variance at its
/// stationary value omega / (1 - alpha - beta), SLDS regime 0.
DiscreteState initial_discrete_state(const SystemSpec& spec);

// ---------------------------------------------------------------------------

/// Integrates spec.n_steps steps, recording every step, applying the shock at
/// its step. Bitwise reproducible given spec.rng_seed and `realization`.
Trajectory simulate(const SystemSpec& spec, const ShockSpec& shock, std::uint64_t realization = 0);

}  // namespace dynbench
