#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dynbench/refmodel.hpp"
#include "dynbench/titration.hpp"

namespace dynbench {

/// Point forecast of the H x dim target block from an L x dim context.
class PointForecaster {
 public:
  virtual ~PointForecaster() = default;
  virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& context) const = 0;
};

/// Repeats the last context row over the horizon.
class LastValueForecaster final : public PointForecaster {
 public:
  explicit LastValueForecaster(int horizon) : horizon_(horizon) {}
  Eigen::MatrixXd predict(const Eigen::MatrixXd& context) const override;

 private:
  int horizon_;
};

/// Predictive mean of a reference model, one column per coordinate.
class RefModelMeanForecaster final : public PointForecaster {
 public:
  explicit RefModelMeanForecaster(RefModel model) : model_(std::move(model)) {}
  Eigen::MatrixXd predict(const Eigen::MatrixXd& context) const override;
  const RefModel& model() const { return model_; }

 private:
  RefModel model_;
};

/// Fits one replica on a (bootstrapped) training set.
using ForecasterFactory = std::function<std::unique_ptr<PointForecaster>(const WindowSet& train)>;

ForecasterFactory last_value_factory(int horizon);
/// Trains a reference model per replica; early stopping uses `val`.
ForecasterFactory refmodel_factory(RefModelHyper hyper, int dim, WindowSet val);

struct EnbpiConfig {
  int block_len = 48;
  int n_bootstrap = 5;
  double alpha = 0.1;
  std::uint64_t rng_seed = 1955;

  void validate() const;
};

/// B index sequences of length n, each a concatenation of contiguous blocks
/// of block_len whose starts are drawn uniformly from [0, n - block_len]
/// (replica b uses stream Bootstrap/b); the last block is truncated.
std::vector<std::vector<std::size_t>> block_bootstrap_indices(std::size_t n, const EnbpiConfig& cfg);

struct EnbpiResult {
  std::vector<std::string> ids;
  std::vector<Eigen::MatrixXd> point;  // H x dim
  std::vector<Eigen::MatrixXd> lo;
  std::vector<Eigen::MatrixXd> hi;
  /// Training windows scored out of bag (the initial residual set size).
  std::size_t residual_count = 0;
  std::size_t updates = 0;
};

/// Ensemble block-bootstrap prediction intervals. Replicas are fit once on
/// bootstrap resamples of the training windows; every training window gets a
/// leave-one-out prediction from the replicas that did not see it, and its
/// absolute residuals (per horizon step and coordinate) seed the residual
/// set. A test point forecast is the mean of leave-one-out aggregates, and
/// the interval is point -/+ the (1 - alpha) empirical residual quantile.
/// Test windows are processed in time order; a window's residuals join the
/// set (dropping as many of the oldest) once its target has been fully
/// observed, i.e. before the first later window whose context covers it.
/// A start that goes back in time marks a new pooled realization and
/// releases every pending window.
EnbpiResult enbpi_intervals(const ForecasterFactory& factory, const WindowSet& train,
                            const WindowSet& test, const EnbpiConfig& cfg);

/// (1 - alpha) conformal quantile: the ceil((1 - alpha)(n + 1))-th smallest
/// value, capped at the largest.
double conformal_quantile(std::vector<double> values, double alpha);

struct IntervalCoverage {
  double coverage = 0.0;
  std::size_t n = 0;
  double mean_width = 0.0;
};

IntervalCoverage interval_coverage(const EnbpiResult& res, const std::vector<Eigen::MatrixXd>& targets);

/// {"version":1,"window_id":...,"lo":[[...]],"hi":[[...]]} per line.
void write_intervals_jsonl(const EnbpiResult& res, std::ostream& out);
/// Coverage with a 95% Wilson interval.
void write_coverage_csv(const IntervalCoverage& cov, double nominal, std::ostream& out);

}  // namespace dynbench
