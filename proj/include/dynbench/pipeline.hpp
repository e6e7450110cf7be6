#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dynbench/config.hpp"
#include "dynbench/evaluate.hpp"
#include "dynbench/scenarios.hpp"

namespace dynbench {

/// Scenario spec with the config's seed override applied.
Scenario resolve_scenario(const ExperimentConfig& cfg);

/// Windows for one (sigma, H), pooled over trajectory and noise realizations.
/// Test and val use cfg.stride_for(H); train uses cfg.train_stride.
WindowSplits pooled_windows(const ExperimentConfig& cfg, double sigma, int horizon);
WindowSplits pooled_windows(const ExperimentConfig& cfg, const std::vector<Trajectory>& trajs, double sigma,
                            int horizon);
std::vector<Trajectory> simulate_realizations(const ExperimentConfig& cfg);

/// "0.25" style token used in file names.
std::string sigma_token(double sigma);
/// Replaces {sigma} and {h} in a path pattern.
std::string expand_pattern(std::string pattern, double sigma, int horizon);

/// Run directory: output_root() / cfg.output_dir.
std::filesystem::path run_dir(const ExperimentConfig& cfg);

/// Each step writes into run_dir(cfg) and returns the files it wrote.
std::vector<std::filesystem::path> run_generate(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> run_titrate(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> run_train_ref(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> run_oracle(const ExperimentConfig& cfg);
std::vector<CalibrationBlock> run_evaluate(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> run_conformal(const ExperimentConfig& cfg);

/// Reads block JSON files and writes report.md / report.csv into `out_dir`.
std::vector<CalibrationBlock> run_report(const std::vector<std::filesystem::path>& block_files,
                                         const std::filesystem::path& out_dir);

/// Config recorded in a manifest written by run_generate.
ExperimentConfig config_from_manifest(const std::filesystem::path& manifest);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& file);

}  // namespace dynbench
