#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dynbench/belief.hpp"
#include "dynbench/titration.hpp"

namespace dynbench {

struct RefModelHyper {
  int context_length = kContextLength;
  int horizon = 64;
  /// Trailing context steps (all coordinates) fed to the encoder.
  int n_lags = 32;
  int reflections = kDefaultReflections;
  double learning_rate = 0.1;
  double clip_norm = 10.0;
  int epochs = 400;
  /// Stop after this many epochs without a validation improvement.
  int patience = 100;
  /// Draws per window for sampled scores; the NLL itself is exact.
  int s_train = 8;
  /// Scale head reads the whole feature vector instead of its bias only.
  bool context_scale = false;
  /// Closed-form ridge fit of the location readout before descent.
  bool fit_location = true;
  double ridge = 1e-6;
  std::uint64_t seed = 1955;

  void validate() const;
};

/// Per-coordinate head. Every matrix maps the feature vector
/// phi = [normalized trailing lags..., 1] (length P) to H outputs.
struct HeadBlock {
  Eigen::MatrixXd w_loc;       // H x P, location readout
  Eigen::MatrixXd w_t;         // H x P, raw translations
  Eigen::MatrixXd w_c;         // H x P, raw scales (bias column only unless context_scale)
  Eigen::MatrixXd generators;  // R x H raw, normalized in the forward pass
};

/// Affine encoder plus spectral head. Inputs and targets are standardized per
/// coordinate with training statistics; beliefs are emitted in data units
/// (location and eigenvalues rescaled, frame and translation unchanged).
struct RefModel {
  RefModelHyper hyper;
  int dim = 1;
  Eigen::VectorXd norm_mean;
  Eigen::VectorXd norm_scale;
  std::vector<HeadBlock> blocks;

  Eigen::Index feature_count() const { return static_cast<Eigen::Index>(hyper.n_lags) * dim + 1; }
  Eigen::Index parameter_count() const;
};

/// Zero encoder, raw-scale bias at soft_bound^-1(0) so lambda = 1, generators
/// e_{k mod H} so the frame starts at a signed identity with live gradients.
RefModel init_refmodel(const RefModelHyper& hyper, int dim);

/// One belief per coordinate, each over the H-step horizon.
std::vector<Belief> forecast(const RefModel& model, const Eigen::MatrixXd& context);

struct LossPoint {
  int epoch = 0;
  double train_nll = 0.0;
  double val_nll = 0.0;
  double grad_norm = 0.0;
};

struct TrainResult {
  RefModel model;
  std::vector<LossPoint> curve;
  int best_epoch = 0;
  double initial_val_nll = 0.0;
  double best_val_nll = 0.0;
  /// Sampled CRPS of the kept model on validation, hyper.s_train draws per window.
  double val_crps = 0.0;
};

/// Full-batch gradient descent on the mean eigenframe NLL (per window, summed
/// over coordinate blocks) with gradient clipping; keeps the parameters with
/// the lowest validation NLL. Throws TrainingError on a non-finite loss.
TrainResult train(const RefModel& init, const WindowSet& train_set, const WindowSet& val_set);

/// Mean NLL per window in data units.
double mean_nll(const RefModel& model, const WindowSet& windows);

/// Mean per-point CRPS from `draws` samples of each belief (stream Sampling/window/block).
double sampled_crps(const RefModel& model, const WindowSet& windows, int draws, std::uint64_t seed);

/// Mean NLL and its gradient in the standardized space used by training, on
/// the flattened trainable parameters (w_t, w_c, generators of each block).
double loss_and_gradient(const RefModel& model, const WindowSet& windows, Eigen::VectorXd* grad);
Eigen::VectorXd flatten_parameters(const RefModel& model);
void unflatten_parameters(RefModel& model, const Eigen::VectorXd& theta);

/// Largest relative deviation between analytic and central-difference
/// gradients over a random subset of at least `count` parameters.
double grad_check(const RefModel& model, const WindowSet& batch, int count = 100, double h = 1e-5,
                  std::uint64_t seed = 7);

/// Versioned JSON checkpoint.
void save_checkpoint(const RefModel& model, std::ostream& out);
RefModel load_checkpoint(std::istream& in);
void write_loss_csv(const std::vector<LossPoint>& curve, std::ostream& out);

}  // namespace dynbench
