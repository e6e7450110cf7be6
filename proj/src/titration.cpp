#include "dynbench/titration.hpp"

#include <cmath>

namespace dynbench {

void TitrationLevel::validate() const {
  if (!(sigma_inj >= 0.0) || !std::isfinite(sigma_inj))
    throw ConfigError("sigma_inj must be a finite nonnegative number");
  for (double s : schedule)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("noise schedule must be nonnegative");
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "?";
}

Split split_from_string(std::string_view name) {
  for (auto s : {Split::Train, Split::Val, Split::Test})
    if (to_string(s) == name) return s;
  throw FormatError("unknown split '" + std::string(name) + "'");
}

NoisySeries inject_noise(const Eigen::MatrixXd& clean, const TitrationLevel& level,
                         std::uint64_t stream, Eigen::Index time_offset) {
  level.validate();
  if (!level.schedule.empty() &&
      static_cast<Eigen::Index>(level.schedule.size()) < time_offset + clean.rows())
    throw SizingError("noise schedule shorter than the series");
  NoisySeries out{clean, clean};
  if (level.schedule.empty() && level.sigma_inj == 0.0) return out;
  Rng rng(level.noise_seed, stream);
  for (Eigen::Index t = 0; t < clean.rows(); ++t) {
    const double sigma = level.sigma_at(time_offset + t);
    for (Eigen::Index j = 0; j < clean.cols(); ++j) out.noisy(t, j) += sigma * rng.normal();
  }
  return out;
}

SplitBounds split_bounds(Eigen::Index n) {
  SplitBounds b;
  b.n = n;
  b.train_end = static_cast<Eigen::Index>(std::floor(kTrainFraction * static_cast<double>(n)));
  b.val_end = static_cast<Eigen::Index>(
      std::floor((kTrainFraction + kValFraction) * static_cast<double>(n) + 1e-9));
  return b;
}

Eigen::Index SplitBounds::begin(Split s) const {
  switch (s) {
    case Split::Train:
      return 0;
    case Split::Val:
      return train_end;
    case Split::Test:
      return val_end;
  }
  return 0;
}

Eigen::Index SplitBounds::end(Split s) const {
  switch (s) {
    case Split::Train:
      return train_end;
    case Split::Val:
      return val_end;
    case Split::Test:
      return n;
  }
  return 0;
}

WindowSet& WindowSplits::operator[](Split s) {
  return s == Split::Train ? train : (s == Split::Val ? val : test);
}

const WindowSet& WindowSplits::operator[](Split s) const {
  return s == Split::Train ? train : (s == Split::Val ? val : test);
}

Eigen::Index window_count(Eigen::Index segment_length, int L, int H, int stride) {
  if (segment_length < L + H) return 0;
  return (segment_length - L - H) / stride + 1;
}

namespace {

void check_window_args(Eigen::Index n, int L, int H, int stride) {
  if (L < 1 || H < 1) throw ConfigError("context and horizon lengths must be positive");
  if (stride < 1) throw ConfigError("stride must be >= 1");
  if (n < L + H)
    throw SizingError("series of length " + std::to_string(n) + " is too short: need at least " +
                      std::to_string(L + H));
}

void window_segment(WindowSet& ws, const Eigen::MatrixXd& series, const Eigen::MatrixXd& clean,
                    Eigen::Index begin, Eigen::Index end, const std::string& id_prefix) {
  const int L = ws.context_length, H = ws.horizon;
  for (Eigen::Index s = begin; s + L + H <= end; s += ws.stride) {
    ws.starts.push_back(s);
    ws.ids.push_back(id_prefix + "-" + std::string(to_string(ws.split)) + "-" + std::to_string(s));
    ws.contexts.push_back(series.middleRows(s, L));
    ws.targets.push_back(series.middleRows(s + L, H));
    ws.clean_targets.push_back(clean.middleRows(s + L, H));
  }
}

WindowSet make_set(Split split, int L, int H, int stride) {
  WindowSet ws;
  ws.split = split;
  ws.context_length = L;
  ws.horizon = H;
  ws.stride = stride;
  return ws;
}

}  // namespace

WindowSplits split_and_window(const Eigen::MatrixXd& series, const Eigen::MatrixXd& clean, int L,
                              int H, int stride, const std::string& id_prefix) {
  check_window_args(series.rows(), L, H, stride);
  const Eigen::MatrixXd& source = clean.size() == 0 ? series : clean;
  if (source.rows() != series.rows() || source.cols() != series.cols())
    throw DimensionError("clean series shape differs from the observed series");
  const SplitBounds b = split_bounds(series.rows());
  WindowSplits out;
  for (auto s : {Split::Train, Split::Val, Split::Test}) {
    out[s] = make_set(s, L, H, stride);
    window_segment(out[s], series, source, b.begin(s), b.end(s), id_prefix);
  }
  return out;
}

WindowSplits titrate(const Trajectory& traj, const TitrationLevel& level, int L, int H, int stride,
                     std::uint64_t trajectory_realization, std::uint64_t noise_realization) {
  const Eigen::MatrixXd& clean = traj.values;
  check_window_args(clean.rows(), L, H, stride);
  const SplitBounds b = split_bounds(clean.rows());
  Eigen::MatrixXd noisy(clean.rows(), clean.cols());
  for (auto s : {Split::Train, Split::Val, Split::Test}) {
    const Eigen::Index begin = b.begin(s), len = b.end(s) - b.begin(s);
    const auto stream = stream_id(StreamPurpose::Noise, trajectory_realization, noise_realization,
                                  static_cast<std::uint64_t>(s));
    noisy.middleRows(begin, len) = inject_noise(clean.middleRows(begin, len), level, stream, begin).noisy;
  }
  const std::string prefix = "t" + std::to_string(trajectory_realization) + "n" +
                             std::to_string(noise_realization);
  WindowSplits out = split_and_window(noisy, clean, L, H, stride, prefix);
  for (auto s : {Split::Train, Split::Val, Split::Test}) out[s].sigma = level.sigma_inj;
  return out;
}

}  // namespace dynbench
