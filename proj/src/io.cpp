#include "dynbench/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace dynbench {

namespace {

constexpr char kMagic[8] = {'D', 'Y', 'N', 'B', 'T', 'R', 'J', '1'};

nlohmann::json header_json(const Trajectory& traj) {
  nlohmann::json h;
  h["format"] = "dynbench-trajectory";
  h["version"] = 1;
  h["system"] = to_string(traj.spec.family);
  h["method"] = to_string(traj.spec.method);
  h["shock"] = to_string(traj.shock.kind);
  h["seed"] = traj.spec.rng_seed;
  h["dt"] = traj.spec.dt;
  h["n_steps"] = traj.values.rows();
  h["dim"] = traj.values.cols();
  h["shock_step"] = traj.shock_step ? nlohmann::json(*traj.shock_step) : nlohmann::json(nullptr);
  h["params"] = traj.spec.params;
  return h;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated trajectory file");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

nlohmann::json rows(const Eigen::MatrixXd& m) {
  auto a = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

Eigen::MatrixXd matrix(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw FormatError(std::string(what) + " must be a non-empty array of rows");
  const auto cols = j.at(0).size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != cols) throw FormatError(std::string(what) + " is ragged");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const auto h = header_json(traj);
  out << "# dynbench-trajectory v1\n";
  out << "# system=" << to_string(traj.spec.family) << " shock=" << to_string(traj.shock.kind)
      << " seed=" << traj.spec.rng_seed << " dt=" << h["dt"].dump()
      << " shock_step=" << (traj.shock_step ? std::to_string(*traj.shock_step) : "none")
      << " n_steps=" << traj.values.rows() << " dim=" << traj.values.cols() << "\n";
  out << "step";
  for (Eigen::Index j = 0; j < traj.values.cols(); ++j) out << ",x" << j;
  out << "\n";
  char buf[32];
  for (Eigen::Index k = 0; k < traj.values.rows(); ++k) {
    out << k;
    for (Eigen::Index j = 0; j < traj.values.cols(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(static_cast<float>(traj.values(k, j))));
      out << buf;
    }
    out << "\n";
  }
}

void write_trajectory_binary(const Trajectory& traj, std::ostream& out) {
  static_assert(std::endian::native == std::endian::little, "binary export assumes a little-endian host");
  const std::string header = header_json(traj).dump();
  out.write(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (Eigen::Index k = 0; k < traj.values.rows(); ++k)
    for (Eigen::Index j = 0; j < traj.values.cols(); ++j) {
      const float v = static_cast<float>(traj.values(k, j));
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

TrajectoryFile read_trajectory_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw FormatError("not a dynbench trajectory file");
  const auto len = get_u32(in);
  TrajectoryFile f;
  f.header.resize(len);
  if (!in.read(f.header.data(), len)) throw FormatError("truncated trajectory header");
  const auto h = nlohmann::json::parse(f.header, nullptr, false);
  if (h.is_discarded() || h.value("version", 0) != 1) throw FormatError("unsupported trajectory header");
  const auto n = h.at("n_steps").get<Eigen::Index>(), d = h.at("dim").get<Eigen::Index>();
  f.values.resize(n, d);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < d; ++j) {
      float v;
      if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("truncated trajectory data");
      f.values(k, j) = v;
    }
  return f;
}

void write_windows_jsonl(const WindowSet& ws, std::ostream& out) {
  for (std::size_t i = 0; i < ws.size(); ++i) {
    nlohmann::json j;
    j["version"] = 1;
    j["window_id"] = ws.ids[i];
    j["split"] = to_string(ws.split);
    j["sigma"] = ws.sigma;
    j["start"] = ws.starts[i];
    j["context"] = rows(ws.contexts[i]);
    j["target"] = rows(ws.targets[i]);
    j["clean_target"] = rows(ws.clean_targets[i]);
    out << j.dump() << '\n';
  }
}

WindowSet read_windows_jsonl(std::istream& in) {
  WindowSet ws;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw FormatError("window line " + std::to_string(lineno) + " is not JSON");
    if (j.value("version", 0) != 1) throw FormatError("unsupported window record version");
    try {
      const auto split = split_from_string(j.at("split").get<std::string>());
      auto ctx = matrix(j.at("context"), "context");
      auto tgt = matrix(j.at("target"), "target");
      auto clean = matrix(j.at("clean_target"), "clean_target");
      if (ws.empty()) {
        ws.split = split;
        ws.sigma = j.at("sigma").get<double>();
        ws.context_length = static_cast<int>(ctx.rows());
        ws.horizon = static_cast<int>(tgt.rows());
      } else if (split != ws.split || ctx.rows() != ws.context_length || tgt.rows() != ws.horizon ||
                 ctx.cols() != ws.dim()) {
        throw FormatError("window line " + std::to_string(lineno) + " does not match the first record");
      }
      if (tgt.cols() != ctx.cols() || clean.rows() != tgt.rows() || clean.cols() != tgt.cols())
        throw FormatError("window line " + std::to_string(lineno) + " has inconsistent shapes");
      ws.ids.push_back(j.at("window_id").get<std::string>());
      ws.starts.push_back(j.at("start").get<Eigen::Index>());
      ws.contexts.push_back(std::move(ctx));
      ws.targets.push_back(std::move(tgt));
      ws.clean_targets.push_back(std::move(clean));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("window line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (ws.starts.size() >= 2) ws.stride = static_cast<int>(ws.starts[1] - ws.starts[0]);
  return ws;
}

}  // namespace dynbench
