#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynbench/exchange.hpp"
#include "dynbench/refmodel.hpp"
#include "dynbench/stats.hpp"
#include "dynbench/titration.hpp"

namespace dynbench {

enum class Stamp { Pass, Fail, NotApplicable };
std::string_view to_string(Stamp s);

/// Diagnostics for one (scenario, sigma, horizon) cell. Eigenframe-based
/// entries are empty for ensemble predictions.
struct CalibrationBlock {
  std::string scenario;
  std::string model;
  double sigma = 0.0;
  int horizon = 0;
  PredictionForm form = PredictionForm::SpectralBelief;

  std::size_t windows_total = 0;
  std::size_t windows_evaluated = 0;
  std::size_t windows_missing = 0;
  /// (window, horizon step, coordinate) triples scored.
  std::size_t points = 0;

  double coverage_50 = 0.0;
  double coverage_90 = 0.0;
  double crps = 0.0;
  double mse = 0.0;
  std::optional<stats::PassRate> sw;
  std::vector<std::size_t> pit_histogram;
  std::optional<stats::TestResult> pit_ks;
  std::optional<stats::TestResult> mahalanobis_ks;
  std::optional<double> mahalanobis_mean_over_dim;
  Stamp stamp = Stamp::NotApplicable;
  std::vector<std::string> notes;
};

struct StampPolicy {
  double q = 0.05;
  /// Allowed coverage deviation in binomial standard errors.
  double coverage_se = 3.0;
  double ks_alpha = 0.01;
  /// The SW pass rate must reach 1 - q - sw_slack.
  double sw_slack = 0.05;
};

struct EvalOptions {
  StampPolicy policy;
  int pit_bins = 20;
  /// Minimum fraction of test windows that must have a prediction.
  double min_fraction = 0.95;
};

/// Scores predictions against the test windows. Throws FormatError for a
/// window_id absent from `test` or a shape mismatch, SizingError when fewer
/// than min_fraction of the windows are covered.
CalibrationBlock evaluate_predictions(const WindowSet& test, const std::vector<PredictionRecord>& preds,
                                      const std::string& scenario, const std::string& model,
                                      const EvalOptions& opts = {});

Stamp stamp_block(const CalibrationBlock& block, const StampPolicy& policy);

/// Oracle forecasters built from the clean targets and the data's sigma:
/// TrueLaw is N(clean, sigma^2 I); HalfStd shrinks the std to sigma / 2.
enum class OracleKind { TrueLaw, HalfStd };
std::string_view to_string(OracleKind k);
OracleKind oracle_kind_from_string(std::string_view name);
std::vector<PredictionRecord> oracle_predictions(const WindowSet& test, OracleKind kind);

std::vector<PredictionRecord> refmodel_predictions(const RefModel& model, const WindowSet& test);

/// One-line summary of where the stamp flips across the sigma sweep, e.g.
/// "resolution: PASS at sigma <= 0.25; FAIL from sigma = 1".
std::string resolution_line(const std::vector<CalibrationBlock>& blocks);

std::string block_to_json(const CalibrationBlock& b);
CalibrationBlock block_from_json(std::string_view text);

}  // namespace dynbench
