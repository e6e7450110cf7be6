#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dynbench/dynamics.hpp"

namespace dynbench {

struct Scenario {
  std::string id;
  SystemSpec spec;
  ShockSpec shock;
};

/// Built-in scenarios: the three unshocked "main" chaotic runs and every
/// shock scenario except the Kuramoto-Sivashinsky pair.
const std::vector<Scenario>& scenario_registry();
std::vector<std::string> scenario_ids();

/// Throws ConfigError listing the known ids; the KS ids get an explicit
/// out-of-scope message.
const Scenario& find_scenario(std::string_view id);

}  // namespace dynbench
