#pragma once

#include <iosfwd>
#include <string>

#include "dynbench/dynamics.hpp"
#include "dynbench/titration.hpp"

namespace dynbench {

/// Text export: comment header lines (format tag, system, shock, seed, dt,
/// shock_step, dims) then "step,x0,x1,..." rows in single precision.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

/// Binary export: the 8-byte magic "DYNBTRJ1", a little-endian uint32 byte
/// count, that many bytes of JSON header, then n_steps x dim float32 values
/// (little-endian, row-major).
void write_trajectory_binary(const Trajectory& traj, std::ostream& out);

struct TrajectoryFile {
  std::string header;  // JSON header text
  Eigen::MatrixXf values;
};
TrajectoryFile read_trajectory_binary(std::istream& in);

/// One JSON object per window:
/// {"version":1,"window_id","split","sigma","start","context","target","clean_target"}
/// with matrices as arrays of rows. Doubles round-trip exactly.
void write_windows_jsonl(const WindowSet& ws, std::ostream& out);
WindowSet read_windows_jsonl(std::istream& in);

}  // namespace dynbench
