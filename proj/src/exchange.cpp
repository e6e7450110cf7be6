#include "dynbench/exchange.hpp"

#include <istream>
#include <ostream>

#include "json.hpp"

namespace dynbench {

using nlohmann::json;

std::string_view to_string(PredictionForm form) {
  switch (form) {
    case PredictionForm::SpectralBelief:
      return "spectral";
    case PredictionForm::MeanStd:
      return "mean_std";
    case PredictionForm::Ensemble:
      return "ensemble";
  }
  return "?";
}

PredictionForm prediction_form_from_string(std::string_view name) {
  if (name == "spectral") return PredictionForm::SpectralBelief;
  if (name == "mean_std") return PredictionForm::MeanStd;
  if (name == "ensemble") return PredictionForm::Ensemble;
  throw FormatError("unknown prediction form '" + std::string(name) + "'");
}

Eigen::Index PredictionRecord::dim() const {
  switch (form) {
    case PredictionForm::SpectralBelief:
      return static_cast<Eigen::Index>(beliefs.size());
    case PredictionForm::MeanStd:
      return mean.cols();
    case PredictionForm::Ensemble:
      return static_cast<Eigen::Index>(samples.size());
  }
  return 0;
}

Eigen::Index PredictionRecord::horizon() const {
  switch (form) {
    case PredictionForm::SpectralBelief:
      return beliefs.empty() ? 0 : beliefs.front().dim();
    case PredictionForm::MeanStd:
      return mean.rows();
    case PredictionForm::Ensemble:
      return samples.empty() ? 0 : samples.front().rows();
  }
  return 0;
}

void PredictionRecord::validate() const {
  const bool has_b = !beliefs.empty(), has_m = mean.size() > 0 || marginal_std.size() > 0,
             has_s = !samples.empty();
  if (int(has_b) + int(has_m) + int(has_s) != 1)
    throw FormatError("prediction " + window_id + " must carry exactly one payload");
  switch (form) {
    case PredictionForm::SpectralBelief:
      if (!has_b) throw FormatError("spectral prediction without beliefs");
      for (const auto& b : beliefs) {
        dynbench::validate(b);
        if (b.dim() != beliefs.front().dim()) throw FormatError("belief blocks differ in horizon");
      }
      break;
    case PredictionForm::MeanStd:
      if (!has_m) throw FormatError("mean_std prediction without payload");
      if (mean.rows() != marginal_std.rows() || mean.cols() != marginal_std.cols())
        throw FormatError("mean and marginal_std differ in shape");
      if ((marginal_std.array() < 0).any()) throw FormatError("negative marginal std");
      break;
    case PredictionForm::Ensemble:
      if (!has_s) throw FormatError("ensemble prediction without samples");
      for (const auto& s : samples)
        if (s.rows() != samples.front().rows() || s.cols() != samples.front().cols() || s.cols() == 0)
          throw FormatError("ensemble blocks differ in shape");
      break;
  }
}

namespace {

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); }

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json rows_json(const Eigen::MatrixXd& m) {
  auto a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

// Array of rows, or a flat array read as a single column.
Eigen::MatrixXd rows_from(const json& j) {
  if (!j.is_array() || j.empty()) throw FormatError("expected a non-empty array");
  if (!j.front().is_array()) return vec_from(j);
  const auto cols = j.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw FormatError("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
  }
  return m;
}

json belief_json(const Belief& b) {
  json j;
  j["t_y"] = vec_json(b.t_y);
  j["lambdas"] = vec_json(b.lambdas);
  j["hh_vectors"] = rows_json(b.hh_vectors);
  if (b.location.size() != 0) j["location"] = vec_json(b.location);
  return j;
}

Belief belief_from(const json& j) {
  Belief b;
  b.t_y = vec_from(j.at("t_y"));
  b.lambdas = vec_from(j.at("lambdas"));
  const auto& hh = j.at("hh_vectors");
  if (hh.empty()) b.hh_vectors.resize(0, b.lambdas.size());
  else b.hh_vectors = rows_from(hh);
  if (j.contains("location")) b.location = vec_from(j.at("location"));
  return b;
}

}  // namespace

std::string encode_prediction(const PredictionRecord& rec) {
  rec.validate();
  json j;
  j["version"] = kExchangeVersion;
  j["window_id"] = rec.window_id;
  j["form"] = to_string(rec.form);
  switch (rec.form) {
    case PredictionForm::SpectralBelief: {
      auto blocks = json::array();
      for (const auto& b : rec.beliefs) blocks.push_back(belief_json(b));
      j["blocks"] = std::move(blocks);
      break;
    }
    case PredictionForm::MeanStd:
      j["mean"] = rows_json(rec.mean);
      j["marginal_std"] = rows_json(rec.marginal_std);
      break;
    case PredictionForm::Ensemble: {
      const Eigen::Index S = rec.samples.front().cols(), H = rec.samples.front().rows();
      auto draws = json::array();
      for (Eigen::Index s = 0; s < S; ++s) {
        Eigen::MatrixXd d(H, rec.dim());
        for (Eigen::Index c = 0; c < rec.dim(); ++c) d.col(c) = rec.samples[static_cast<std::size_t>(c)].col(s);
        draws.push_back(rows_json(d));
      }
      j["samples"] = std::move(draws);
      break;
    }
  }
  return j.dump();
}

PredictionRecord decode_prediction(std::string_view line) {
  const auto j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw FormatError("prediction line is not a JSON object");
  const int version = j.value("version", 0);
  if (version != kExchangeVersion)
    throw FormatError("unsupported prediction format version " + std::to_string(version));
  PredictionRecord rec;
  try {
    rec.window_id = j.at("window_id").get<std::string>();
    rec.form = prediction_form_from_string(j.at("form").get<std::string>());
    switch (rec.form) {
      case PredictionForm::SpectralBelief:
        if (j.contains("blocks")) {
          for (const auto& b : j.at("blocks")) rec.beliefs.push_back(belief_from(b));
        } else {
          rec.beliefs.push_back(belief_from(j));
        }
        break;
      case PredictionForm::MeanStd:
        rec.mean = rows_from(j.at("mean"));
        rec.marginal_std = rows_from(j.at("marginal_std"));
        break;
      case PredictionForm::Ensemble: {
        const auto& draws = j.at("samples");
        if (!draws.is_array() || draws.empty()) throw FormatError("samples must be a non-empty array");
        std::vector<Eigen::MatrixXd> d;
        for (const auto& s : draws) d.push_back(rows_from(s));
        const Eigen::Index H = d.front().rows(), dim = d.front().cols();
        for (const auto& m : d)
          if (m.rows() != H || m.cols() != dim) throw FormatError("ensemble draws differ in shape");
        for (Eigen::Index c = 0; c < dim; ++c) {
          Eigen::MatrixXd block(H, static_cast<Eigen::Index>(d.size()));
          for (std::size_t s = 0; s < d.size(); ++s) block.col(static_cast<Eigen::Index>(s)) = d[s].col(c);
          rec.samples.push_back(std::move(block));
        }
        break;
      }
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed prediction record: " + std::string(e.what()));
  } catch (const DomainError& e) {
    throw FormatError("invalid prediction " + rec.window_id + ": " + e.what());
  }
  try {
    rec.validate();
  } catch (const Error& e) {
    throw FormatError("invalid prediction " + rec.window_id + ": " + e.what());
  }
  return rec;
}

void write_predictions(const std::vector<PredictionRecord>& recs, std::ostream& out) {
  for (const auto& r : recs) out << encode_prediction(r) << '\n';
}

std::vector<PredictionRecord> read_predictions(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(decode_prediction(line));
    } catch (const FormatError& e) {
      throw FormatError("predictions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace dynbench
