#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dynbench/belief.hpp"

namespace dynbench {

inline constexpr int kExchangeVersion = 1;

enum class PredictionForm { SpectralBelief, MeanStd, Ensemble };
std::string_view to_string(PredictionForm form);
PredictionForm prediction_form_from_string(std::string_view name);

/// One forecaster output for one window. Coordinates are separate blocks,
/// each over the H-step horizon. Exactly one payload is filled, per `form`.
struct PredictionRecord {
  std::string window_id;
  PredictionForm form = PredictionForm::SpectralBelief;
  std::vector<Belief> beliefs;          // SpectralBelief: one per coordinate
  Eigen::MatrixXd mean;                 // MeanStd: H x dim
  Eigen::MatrixXd marginal_std;         // MeanStd: H x dim
  std::vector<Eigen::MatrixXd> samples; // Ensemble: one H x S matrix per coordinate

  Eigen::Index dim() const;
  Eigen::Index horizon() const;
  void validate() const;
};

/// JSON-lines codec. Every line carries "version", "window_id" and "form".
///   spectral: "blocks": [{"t_y":[], "lambdas":[], "hh_vectors":[[]], "location":[]?}, ...]
///   mean_std: "mean": [[...]], "marginal_std": [[...]]   (H rows x dim columns)
///   ensemble: "samples": [[[...]]]                         (S draws of H rows x dim columns)
/// A univariate spectral record may put the block fields at top level, and a
/// univariate mean_std / ensemble record may use flat length-H arrays.
std::string encode_prediction(const PredictionRecord& rec);
PredictionRecord decode_prediction(std::string_view line);

void write_predictions(const std::vector<PredictionRecord>& recs, std::ostream& out);
std::vector<PredictionRecord> read_predictions(std::istream& in);

}  // namespace dynbench
