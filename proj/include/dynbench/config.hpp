#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dynbench/conformal.hpp"
#include "dynbench/evaluate.hpp"
#include "dynbench/refmodel.hpp"

namespace dynbench {

enum class ForecasterSource { RefModel, External, Oracle };

/// Everything one run needs. Read from a "key = value" text file; see
/// docs/formats.md for the key list.
struct ExperimentConfig {
  std::string scenario = "DOUBLEWELL_BASE";
  std::vector<double> sigmas = {0.0, 0.25, 1.0, 2.0};
  std::vector<int> horizons = {64};
  int context_length = kContextLength;
  /// Test/val window stride; 0 means H / 2.
  int stride = 0;
  int train_stride = 4;
  int trajectory_realizations = 1;
  int noise_realizations = 3;
  std::optional<std::uint64_t> seed;  // overrides the scenario's rng_seed
  std::uint64_t noise_seed = 1955;
  /// Sigma of the training data for train-ref.
  double train_sigma = 0.25;

  ForecasterSource forecaster = ForecasterSource::Oracle;
  std::string checkpoint;
  std::string predictions;
  OracleKind oracle = OracleKind::TrueLaw;
  std::string model_name;

  std::string output_dir = "run";
  std::string trajectory_format = "csv";

  RefModelHyper ref;
  EnbpiConfig enbpi;
  EvalOptions eval;

  int stride_for(int horizon) const { return stride > 0 ? stride : std::max(1, horizon / 2); }
  std::string model_label() const;
  void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(write_config(c)) == c.
std::string write_config(const ExperimentConfig& c);

/// Output root: $DYNBENCH_OUT if set, else "dynbench_out" in the working directory.
std::filesystem::path output_root();

}  // namespace dynbench
