#include "dynbench/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>

#include "dynbench/stats.hpp"
#include "json.hpp"

namespace dynbench {

Eigen::MatrixXd LastValueForecaster::predict(const Eigen::MatrixXd& context) const {
  if (context.rows() == 0) throw DimensionError("empty context");
  return context.row(context.rows() - 1).replicate(horizon_, 1);
}

Eigen::MatrixXd RefModelMeanForecaster::predict(const Eigen::MatrixXd& context) const {
  const auto beliefs = forecast(model_, context);
  Eigen::MatrixXd out(model_.hyper.horizon, model_.dim);
  for (int j = 0; j < model_.dim; ++j) out.col(j) = belief_mean(beliefs[static_cast<std::size_t>(j)]);
  return out;
}

ForecasterFactory last_value_factory(int horizon) {
  return [horizon](const WindowSet&) { return std::make_unique<LastValueForecaster>(horizon); };
}

ForecasterFactory refmodel_factory(RefModelHyper hyper, int dim, WindowSet val) {
  return [hyper, dim, val = std::move(val)](const WindowSet& train_set) {
    auto res = train(init_refmodel(hyper, dim), train_set, val);
    return std::make_unique<RefModelMeanForecaster>(std::move(res.model));
  };
}

void EnbpiConfig::validate() const {
  if (block_len < 1) throw ConfigError("block length must be positive");
  if (n_bootstrap < 2) throw ConfigError("EnbPI needs at least two bootstrap replicas");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
}

std::vector<std::vector<std::size_t>> block_bootstrap_indices(std::size_t n, const EnbpiConfig& cfg) {
  cfg.validate();
  const auto len = static_cast<std::size_t>(cfg.block_len);
  if (n < len)
    throw SizingError("block bootstrap needs n >= block_len (" + std::to_string(n) + " < " +
                      std::to_string(len) + ")");
  std::vector<std::vector<std::size_t>> out;
  for (int b = 0; b < cfg.n_bootstrap; ++b) {
    Rng rng(cfg.rng_seed, stream_id(StreamPurpose::Bootstrap, static_cast<std::uint64_t>(b)));
    std::vector<std::size_t> idx;
    idx.reserve(n);
    while (idx.size() < n) {
      const auto start = static_cast<std::size_t>(rng.below(n - len + 1));
      for (std::size_t k = 0; k < len && idx.size() < n; ++k) idx.push_back(start + k);
    }
    out.push_back(std::move(idx));
  }
  return out;
}

double conformal_quantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw DomainError("degenerate residual set: no residuals to calibrate the width");
  const double n = static_cast<double>(values.size());
  auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * (n + 1.0)));
  k = std::clamp<std::size_t>(k, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end());
  return values[k - 1];
}

namespace {

WindowSet subset(const WindowSet& src, const std::vector<std::size_t>& idx) {
  WindowSet out;
  out.split = src.split;
  out.context_length = src.context_length;
  out.horizon = src.horizon;
  out.stride = src.stride;
  out.sigma = src.sigma;
  for (auto i : idx) {
    out.starts.push_back(src.starts[i]);
    out.ids.push_back(src.ids[i]);
    out.contexts.push_back(src.contexts[i]);
    out.targets.push_back(src.targets[i]);
    out.clean_targets.push_back(src.clean_targets[i]);
  }
  return out;
}

}  // namespace

EnbpiResult enbpi_intervals(const ForecasterFactory& factory, const WindowSet& train_set,
                            const WindowSet& test, const EnbpiConfig& cfg) {
  cfg.validate();
  if (train_set.empty() || test.empty()) throw SizingError("EnbPI needs training and test windows");
  const std::size_t T = train_set.size();
  const auto B = static_cast<std::size_t>(cfg.n_bootstrap);
  const auto boot = block_bootstrap_indices(T, cfg);

  std::vector<std::unique_ptr<PointForecaster>> replicas;
  std::vector<std::vector<bool>> in_bag(B, std::vector<bool>(T, false));
  for (std::size_t b = 0; b < B; ++b) {
    for (auto i : boot[b]) in_bag[b][i] = true;
    replicas.push_back(factory(subset(train_set, boot[b])));
  }

  // Out-of-bag weight of each replica in the aggregated test forecast:
  // mean over i of the mean over {b : i not in S_b} of f_b.
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(B));
  const Eigen::Index H = train_set.targets.front().rows(), dim = train_set.dim();
  std::vector<std::vector<double>> residuals(static_cast<std::size_t>(H * dim));
  std::size_t scored = 0;
  for (std::size_t i = 0; i < T; ++i) {
    std::vector<std::size_t> oob;
    for (std::size_t b = 0; b < B; ++b)
      if (!in_bag[b][i]) oob.push_back(b);
    if (oob.empty()) continue;
    Eigen::MatrixXd pred = Eigen::MatrixXd::Zero(H, dim);
    for (auto b : oob) {
      pred += replicas[b]->predict(train_set.contexts[i]);
      weight(static_cast<Eigen::Index>(b)) += 1.0 / static_cast<double>(oob.size());
    }
    pred /= static_cast<double>(oob.size());
    const Eigen::MatrixXd err = (train_set.targets[i] - pred).cwiseAbs();
    for (Eigen::Index k = 0; k < err.size(); ++k) residuals[static_cast<std::size_t>(k)].push_back(err(k));
    ++scored;
  }
  if (scored == 0) throw DomainError("degenerate residual set: every training window is in every replica");
  weight /= weight.sum();

  // Residual sets as FIFO queues so the online update drops the oldest.
  std::vector<std::deque<double>> fifo;
  for (auto& r : residuals) fifo.emplace_back(r.begin(), r.end());

  EnbpiResult res;
  res.residual_count = scored;
  std::deque<std::pair<Eigen::Index, Eigen::MatrixXd>> pending;  // (observed-at time, |residual|)
  std::vector<double> scratch;
  for (std::size_t w = 0; w < test.size(); ++w) {
    const Eigen::Index now = test.starts[w] + test.context_length;
    // Pooled sets restart the clock for every realization; everything from
    // the previous series has been observed by then.
    const bool restart = w > 0 && test.starts[w] < test.starts[w - 1];
    while (!pending.empty() && (restart || pending.front().first <= now)) {
      const auto& err = pending.front().second;
      for (Eigen::Index k = 0; k < err.size(); ++k) {
        auto& q = fifo[static_cast<std::size_t>(k)];
        q.push_back(err(k));
        q.pop_front();
      }
      ++res.updates;
      pending.pop_front();
    }
    Eigen::MatrixXd point = Eigen::MatrixXd::Zero(H, dim);
    for (std::size_t b = 0; b < B; ++b)
      point += weight(static_cast<Eigen::Index>(b)) * replicas[b]->predict(test.contexts[w]);
    Eigen::MatrixXd width(H, dim);
    for (Eigen::Index k = 0; k < width.size(); ++k) {
      const auto& q = fifo[static_cast<std::size_t>(k)];
      scratch.assign(q.begin(), q.end());
      width(k) = conformal_quantile(scratch, cfg.alpha);
    }
    res.ids.push_back(test.ids[w]);
    res.lo.push_back(point - width);
    res.hi.push_back(point + width);
    pending.emplace_back(now + H, (test.targets[w] - point).cwiseAbs());
    res.point.push_back(std::move(point));
  }
  return res;
}

IntervalCoverage interval_coverage(const EnbpiResult& res, const std::vector<Eigen::MatrixXd>& targets) {
  if (targets.size() != res.lo.size()) throw DimensionError("one target per interval window required");
  IntervalCoverage out;
  double inside = 0.0, width = 0.0;
  for (std::size_t w = 0; w < targets.size(); ++w) {
    const auto& y = targets[w];
    inside += ((y.array() >= res.lo[w].array()) && (y.array() <= res.hi[w].array())).cast<double>().sum();
    width += (res.hi[w] - res.lo[w]).sum();
    out.n += static_cast<std::size_t>(y.size());
  }
  if (out.n > 0) {
    out.coverage = inside / static_cast<double>(out.n);
    out.mean_width = width / static_cast<double>(out.n);
  }
  return out;
}

void write_intervals_jsonl(const EnbpiResult& res, std::ostream& out) {
  auto rows = [](const Eigen::MatrixXd& m) {
    auto a = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      auto row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      a.push_back(std::move(row));
    }
    return a;
  };
  for (std::size_t w = 0; w < res.ids.size(); ++w) {
    nlohmann::json j;
    j["version"] = 1;
    j["window_id"] = res.ids[w];
    j["lo"] = rows(res.lo[w]);
    j["hi"] = rows(res.hi[w]);
    out << j.dump() << '\n';
  }
}

void write_coverage_csv(const IntervalCoverage& cov, double nominal, std::ostream& out) {
  const auto ci = stats::wilson_interval(cov.coverage, cov.n, 0.95);
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%zu,%.6f,%.6f,%.6f\n", nominal, cov.coverage, cov.n, ci.lo,
                ci.hi, cov.mean_width);
  out << "# dynbench-enbpi-coverage v1\nnominal,coverage,n,ci_lo,ci_hi,mean_width\n" << buf;
}

}  // namespace dynbench
