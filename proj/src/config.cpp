#include "dynbench/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace dynbench {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return x;
}

int to_int32(const std::string& key, const std::string& v) { return static_cast<int>(to_int(key, v)); }

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError("key '" + key + "': '" + v + "' is not an unsigned integer");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> s = {
      {"scenario", [](auto& c, auto&, auto& v) { c.scenario = v; }},
      {"sigmas",
       [](auto& c, auto& k, auto& v) {
         c.sigmas.clear();
         for (const auto& x : split_list(v)) c.sigmas.push_back(to_double(k, x));
       }},
      {"horizons",
       [](auto& c, auto& k, auto& v) {
         c.horizons.clear();
         for (const auto& x : split_list(v)) c.horizons.push_back(to_int32(k, x));
       }},
      {"context_length", [](auto& c, auto& k, auto& v) { c.context_length = to_int32(k, v); }},
      {"stride", [](auto& c, auto& k, auto& v) { c.stride = to_int32(k, v); }},
      {"train_stride", [](auto& c, auto& k, auto& v) { c.train_stride = to_int32(k, v); }},
      {"trajectory_realizations", [](auto& c, auto& k, auto& v) { c.trajectory_realizations = to_int32(k, v); }},
      {"noise_realizations", [](auto& c, auto& k, auto& v) { c.noise_realizations = to_int32(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
      {"noise_seed", [](auto& c, auto& k, auto& v) { c.noise_seed = to_u64(k, v); }},
      {"train_sigma", [](auto& c, auto& k, auto& v) { c.train_sigma = to_double(k, v); }},
      {"forecaster",
       [](auto& c, auto&, auto& v) {
         if (v == "refmodel") c.forecaster = ForecasterSource::RefModel;
         else if (v == "external") c.forecaster = ForecasterSource::External;
         else if (v == "oracle") c.forecaster = ForecasterSource::Oracle;
         else throw ConfigError("forecaster must be refmodel, external or oracle");
       }},
      {"checkpoint", [](auto& c, auto&, auto& v) { c.checkpoint = v; }},
      {"predictions", [](auto& c, auto&, auto& v) { c.predictions = v; }},
      {"oracle", [](auto& c, auto&, auto& v) { c.oracle = oracle_kind_from_string(v); }},
      {"model_name", [](auto& c, auto&, auto& v) { c.model_name = v; }},
      {"output_dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
      {"trajectory_format", [](auto& c, auto&, auto& v) { c.trajectory_format = v; }},
      {"ref.n_lags", [](auto& c, auto& k, auto& v) { c.ref.n_lags = to_int32(k, v); }},
      {"ref.reflections", [](auto& c, auto& k, auto& v) { c.ref.reflections = to_int32(k, v); }},
      {"ref.learning_rate", [](auto& c, auto& k, auto& v) { c.ref.learning_rate = to_double(k, v); }},
      {"ref.clip_norm", [](auto& c, auto& k, auto& v) { c.ref.clip_norm = to_double(k, v); }},
      {"ref.epochs", [](auto& c, auto& k, auto& v) { c.ref.epochs = to_int32(k, v); }},
      {"ref.patience", [](auto& c, auto& k, auto& v) { c.ref.patience = to_int32(k, v); }},
      {"ref.s_train", [](auto& c, auto& k, auto& v) { c.ref.s_train = to_int32(k, v); }},
      {"ref.context_scale", [](auto& c, auto& k, auto& v) { c.ref.context_scale = to_bool(k, v); }},
      {"ref.fit_location", [](auto& c, auto& k, auto& v) { c.ref.fit_location = to_bool(k, v); }},
      {"ref.ridge", [](auto& c, auto& k, auto& v) { c.ref.ridge = to_double(k, v); }},
      {"ref.seed", [](auto& c, auto& k, auto& v) { c.ref.seed = to_u64(k, v); }},
      {"enbpi.block_len", [](auto& c, auto& k, auto& v) { c.enbpi.block_len = to_int32(k, v); }},
      {"enbpi.n_bootstrap", [](auto& c, auto& k, auto& v) { c.enbpi.n_bootstrap = to_int32(k, v); }},
      {"enbpi.alpha", [](auto& c, auto& k, auto& v) { c.enbpi.alpha = to_double(k, v); }},
      {"enbpi.seed", [](auto& c, auto& k, auto& v) { c.enbpi.rng_seed = to_u64(k, v); }},
      {"eval.q", [](auto& c, auto& k, auto& v) { c.eval.policy.q = to_double(k, v); }},
      {"eval.pit_bins", [](auto& c, auto& k, auto& v) { c.eval.pit_bins = to_int32(k, v); }},
      {"eval.min_fraction", [](auto& c, auto& k, auto& v) { c.eval.min_fraction = to_double(k, v); }},
  };
  return s;
}

}  // namespace

std::string ExperimentConfig::model_label() const {
  if (!model_name.empty()) return model_name;
  switch (forecaster) {
    case ForecasterSource::RefModel:
      return "refmodel";
    case ForecasterSource::External:
      return "external";
    case ForecasterSource::Oracle:
      return std::string("oracle-") + std::string(to_string(oracle));
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (sigmas.empty()) throw ConfigError("sigma sweep must not be empty");
  for (double s : sigmas)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("sigmas must be finite and nonnegative");
  if (horizons.empty()) throw ConfigError("horizon list must not be empty");
  for (int h : horizons)
    if (h < 1) throw ConfigError("horizons must be positive");
  if (context_length < 1) throw ConfigError("context_length must be positive");
  if (stride < 0 || train_stride < 1) throw ConfigError("strides must be positive (stride 0 means H/2)");
  if (trajectory_realizations < 1 || noise_realizations < 1)
    throw ConfigError("realization counts must be positive");
  if (trajectory_format != "csv" && trajectory_format != "bin")
    throw ConfigError("trajectory_format must be csv or bin");
  if (!(eval.min_fraction > 0.0 && eval.min_fraction <= 1.0)) throw ConfigError("eval.min_fraction must lie in (0,1]");
  ref.validate();
  enbpi.validate();
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(c, key, value);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

std::string write_config(const ExperimentConfig& c) {
  std::ostringstream o;
  auto list = [](const auto& v, auto f) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + f(x);
    return s;
  };
  o << "# dynbench config v1\n";
  o << "scenario = " << c.scenario << "\n";
  o << "sigmas = " << list(c.sigmas, g17) << "\n";
  o << "horizons = " << list(c.horizons, [](int h) { return std::to_string(h); }) << "\n";
  o << "context_length = " << c.context_length << "\n";
  o << "stride = " << c.stride << "\n";
  o << "train_stride = " << c.train_stride << "\n";
  o << "trajectory_realizations = " << c.trajectory_realizations << "\n";
  o << "noise_realizations = " << c.noise_realizations << "\n";
  if (c.seed) o << "seed = " << *c.seed << "\n";
  o << "noise_seed = " << c.noise_seed << "\n";
  o << "train_sigma = " << g17(c.train_sigma) << "\n";
  o << "forecaster = "
    << (c.forecaster == ForecasterSource::RefModel ? "refmodel"
        : c.forecaster == ForecasterSource::External ? "external" : "oracle")
    << "\n";
  if (!c.checkpoint.empty()) o << "checkpoint = " << c.checkpoint << "\n";
  if (!c.predictions.empty()) o << "predictions = " << c.predictions << "\n";
  o << "oracle = " << to_string(c.oracle) << "\n";
  if (!c.model_name.empty()) o << "model_name = " << c.model_name << "\n";
  o << "output_dir = " << c.output_dir << "\n";
  o << "trajectory_format = " << c.trajectory_format << "\n";
  o << "ref.n_lags = " << c.ref.n_lags << "\n";
  o << "ref.reflections = " << c.ref.reflections << "\n";
  o << "ref.learning_rate = " << g17(c.ref.learning_rate) << "\n";
  o << "ref.clip_norm = " << g17(c.ref.clip_norm) << "\n";
  o << "ref.epochs = " << c.ref.epochs << "\n";
  o << "ref.patience = " << c.ref.patience << "\n";
  o << "ref.s_train = " << c.ref.s_train << "\n";
  o << "ref.context_scale = " << (c.ref.context_scale ? "true" : "false") << "\n";
  o << "ref.fit_location = " << (c.ref.fit_location ? "true" : "false") << "\n";
  o << "ref.ridge = " << g17(c.ref.ridge) << "\n";
  o << "ref.seed = " << c.ref.seed << "\n";
  o << "enbpi.block_len = " << c.enbpi.block_len << "\n";
  o << "enbpi.n_bootstrap = " << c.enbpi.n_bootstrap << "\n";
  o << "enbpi.alpha = " << g17(c.enbpi.alpha) << "\n";
  o << "enbpi.seed = " << c.enbpi.rng_seed << "\n";
  o << "eval.q = " << g17(c.eval.policy.q) << "\n";
  o << "eval.pit_bins = " << c.eval.pit_bins << "\n";
  o << "eval.min_fraction = " << g17(c.eval.min_fraction) << "\n";
  return o.str();
}

std::filesystem::path output_root() {
  if (const char* env = std::getenv("DYNBENCH_OUT"); env && *env) return env;
  return "dynbench_out";
}

}  // namespace dynbench
