#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynbench/dynamics.hpp"

namespace dynbench {

inline constexpr int kContextLength = 336;
inline constexpr double kTrainFraction = 0.7;
inline constexpr double kValFraction = 0.2;

/// Observation noise of standard deviation sigma_inj; zero means no injection.
/// A non-empty schedule overrides sigma_inj with a per-time-step value.
struct TitrationLevel {
  double sigma_inj = 0.0;
  std::uint64_t noise_seed = 0;
  std::vector<double> schedule;

  void validate() const;
  double sigma_at(Eigen::Index t) const {
    return schedule.empty() ? sigma_inj : schedule[static_cast<std::size_t>(t)];
  }
};

enum class Split { Train, Val, Test };
std::string_view to_string(Split split);
Split split_from_string(std::string_view name);

/// Observed series with its noise-free source.
struct NoisySeries {
  Eigen::MatrixXd noisy;
  Eigen::MatrixXd clean;
};

/// y = y_clean + eps, eps iid N(0, sigma^2) per time step and coordinate,
/// drawn from the (noise_seed, stream) sequence. sigma = 0 returns the input.
NoisySeries inject_noise(const Eigen::MatrixXd& clean, const TitrationLevel& level,
                         std::uint64_t stream = 0, Eigen::Index time_offset = 0);

/// Chronological split boundaries: [0, train_end), [train_end, val_end), [val_end, n).
struct SplitBounds {
  Eigen::Index train_end = 0;
  Eigen::Index val_end = 0;
  Eigen::Index n = 0;

  Eigen::Index begin(Split s) const;
  Eigen::Index end(Split s) const;
};

SplitBounds split_bounds(Eigen::Index n);

struct WindowSet {
  Split split = Split::Train;
  int context_length = kContextLength;
  int horizon = 64;
  int stride = 32;
  double sigma = 0.0;
  /// Global time index of each window's first context step.
  std::vector<Eigen::Index> starts;
  std::vector<std::string> ids;
  std::vector<Eigen::MatrixXd> contexts;       // L x dim
  std::vector<Eigen::MatrixXd> targets;        // H x dim
  std::vector<Eigen::MatrixXd> clean_targets;  // H x dim

  std::size_t size() const { return contexts.size(); }
  bool empty() const { return contexts.empty(); }
  Eigen::Index dim() const { return contexts.empty() ? 0 : contexts.front().cols(); }
};

struct WindowSplits {
  WindowSet train;
  WindowSet val;
  WindowSet test;

  WindowSet& operator[](Split s);
  const WindowSet& operator[](Split s) const;
};

/// Windows [start, start + L) -> [start + L, start + L + H) taken every
/// `stride` steps inside each split segment; none straddles a boundary.
/// `clean` may be empty, in which case clean targets equal the targets.
WindowSplits split_and_window(const Eigen::MatrixXd& series, const Eigen::MatrixXd& clean, int L,
                              int H, int stride, const std::string& id_prefix = "w");

/// Splits the clean trajectory, injects noise into each segment from its own
/// sub-stream (purpose Noise, a = trajectory realization, b = noise
/// realization, c = split), then windows.
WindowSplits titrate(const Trajectory& traj, const TitrationLevel& level, int L, int H, int stride,
                     std::uint64_t trajectory_realization = 0,
                     std::uint64_t noise_realization = 0);

/// Number of windows a segment of the given length produces.
Eigen::Index window_count(Eigen::Index segment_length, int L, int H, int stride);

}  // namespace dynbench
