#include "dynbench/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "json.hpp"

namespace dynbench {

using nlohmann::json;

std::string_view to_string(Stamp s) {
  switch (s) {
    case Stamp::Pass:
      return "PASS";
    case Stamp::Fail:
      return "FAIL";
    case Stamp::NotApplicable:
      return "N/A";
  }
  return "?";
}

std::string_view to_string(OracleKind k) { return k == OracleKind::TrueLaw ? "true" : "half"; }

OracleKind oracle_kind_from_string(std::string_view name) {
  if (name == "true" || name == "true_law") return OracleKind::TrueLaw;
  if (name == "half" || name == "half_std" || name == "half_variance") return OracleKind::HalfStd;
  throw ConfigError("unknown oracle kind '" + std::string(name) + "' (expected true or half)");
}

namespace {

// Mean/std predictions become beliefs with an identity frame.
Belief diagonal_belief(const Eigen::VectorXd& mean, const Eigen::VectorXd& sd) {
  Belief b;
  b.t_y = Eigen::VectorXd::Zero(mean.size());
  b.lambdas = sd;
  b.hh_vectors.resize(0, mean.size());
  b.location = mean;
  return b;
}

double gaussian_pit(double mu, double sd, double y) {
  if (sd > 0.0) return stats::pit(mu, sd, y);
  return y < mu ? 0.0 : (y > mu ? 1.0 : 0.5);
}

double quantile7(std::vector<double>& v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

json test_json(const stats::TestResult& t) {
  return {{"statistic", t.statistic}, {"p_value", t.p_value}, {"n", t.n}};
}

stats::TestResult test_from(const json& j) {
  stats::TestResult t;
  t.statistic = j.at("statistic");
  t.p_value = j.at("p_value");
  t.n = j.at("n");
  return t;
}

}  // namespace

CalibrationBlock evaluate_predictions(const WindowSet& test, const std::vector<PredictionRecord>& preds,
                                      const std::string& scenario, const std::string& model,
                                      const EvalOptions& opts) {
  if (test.empty()) throw SizingError("no test windows to evaluate");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < test.size(); ++i) index.emplace(test.ids[i], i);

  std::vector<const PredictionRecord*> by_window(test.size(), nullptr);
  std::set<PredictionForm> forms;
  for (const auto& p : preds) {
    const auto it = index.find(p.window_id);
    if (it == index.end()) throw FormatError("prediction for unknown window '" + p.window_id + "'");
    if (by_window[it->second]) throw FormatError("duplicate prediction for window '" + p.window_id + "'");
    if (p.dim() != test.dim() || p.horizon() != test.horizon)
      throw FormatError("prediction '" + p.window_id + "' has the wrong shape");
    by_window[it->second] = &p;
    forms.insert(p.form);
  }
  if (forms.size() > 1) throw FormatError("predictions mix several forms");

  CalibrationBlock blk;
  blk.scenario = scenario;
  blk.model = model;
  blk.sigma = test.sigma;
  blk.horizon = test.horizon;
  blk.windows_total = test.size();
  blk.windows_evaluated = static_cast<std::size_t>(std::count_if(
      by_window.begin(), by_window.end(), [](const PredictionRecord* p) { return p != nullptr; }));
  blk.windows_missing = blk.windows_total - blk.windows_evaluated;
  if (static_cast<double>(blk.windows_evaluated) < opts.min_fraction * static_cast<double>(blk.windows_total))
    throw SizingError("predictions cover " + std::to_string(blk.windows_evaluated) + " of " +
                      std::to_string(blk.windows_total) + " test windows (" +
                      std::to_string(blk.windows_missing) + " missing)");
  if (blk.windows_missing > 0)
    blk.notes.push_back(std::to_string(blk.windows_missing) + " test windows had no prediction");
  blk.form = forms.empty() ? PredictionForm::SpectralBelief : *forms.begin();

  const double z50 = stats::central_z(0.5), z90 = stats::central_z(0.9);
  const Eigen::Index H = test.horizon, dim = test.dim();
  double in50 = 0.0, in90 = 0.0, crps = 0.0, se = 0.0;
  std::size_t points = 0;

  std::vector<Belief> beliefs;
  std::vector<Eigen::VectorXd> targets;
  std::vector<double> pit;
  std::vector<std::vector<double>> zs(static_cast<std::size_t>(H * dim));
  std::vector<double> row;

  for (std::size_t w = 0; w < test.size(); ++w) {
    const PredictionRecord* p = by_window[w];
    if (!p) continue;
    for (Eigen::Index c = 0; c < dim; ++c) {
      const Eigen::VectorXd y = test.targets[w].col(c);
      if (p->form == PredictionForm::Ensemble) {
        const Eigen::MatrixXd& s = p->samples[static_cast<std::size_t>(c)];
        for (Eigen::Index h = 0; h < H; ++h) {
          row.assign(s.row(h).begin(), s.row(h).end());
          crps += stats::crps_ensemble(row, y(h));
          const double mean = s.row(h).mean();
          se += (mean - y(h)) * (mean - y(h));
          in50 += (y(h) >= quantile7(row, 0.25) && y(h) <= quantile7(row, 0.75)) ? 1.0 : 0.0;
          in90 += (y(h) >= quantile7(row, 0.05) && y(h) <= quantile7(row, 0.95)) ? 1.0 : 0.0;
          ++points;
        }
        continue;
      }
      Belief b = p->form == PredictionForm::SpectralBelief
                     ? p->beliefs[static_cast<std::size_t>(c)]
                     : diagonal_belief(p->mean.col(c), p->marginal_std.col(c));
      const Eigen::VectorXd mu = belief_mean(b), sd = marginal_std(b);
      for (Eigen::Index h = 0; h < H; ++h) {
        const double r = std::abs(y(h) - mu(h));
        in50 += r <= z50 * sd(h) ? 1.0 : 0.0;
        in90 += r <= z90 * sd(h) ? 1.0 : 0.0;
        crps += stats::crps_gaussian(mu(h), sd(h), y(h));
        se += r * r;
        pit.push_back(gaussian_pit(mu(h), sd(h), y(h)));
        ++points;
      }
      const auto res = whiten(b, y);
      for (Eigen::Index i = 0; i < H; ++i) zs[static_cast<std::size_t>(c * H + i)].push_back(res.z(i));
      beliefs.push_back(std::move(b));
      targets.push_back(y);
    }
  }

  blk.points = points;
  if (points > 0) {
    const double n = static_cast<double>(points);
    blk.coverage_50 = in50 / n;
    blk.coverage_90 = in90 / n;
    blk.crps = crps / n;
    blk.mse = se / n;
  }

  if (blk.form == PredictionForm::Ensemble) {
    blk.notes.push_back(
        "ensemble form: PIT, Shapiro-Wilk and Mahalanobis tests skipped (no Gaussian belief); "
        "coverage from empirical sample quantiles");
    blk.stamp = Stamp::NotApplicable;
    return blk;
  }
  if (blk.form == PredictionForm::MeanStd)
    blk.notes.push_back("mean_std form: Mahalanobis and Shapiro-Wilk use an identity frame");

  blk.pit_histogram = stats::pit_histogram(pit, opts.pit_bins);
  if (!pit.empty()) blk.pit_ks = stats::ks_uniform(pit);
  if (!beliefs.empty()) {
    const auto m = stats::mahalanobis_suite(beliefs, targets, true);
    blk.mahalanobis_ks = m.ks;
    blk.mahalanobis_mean_over_dim = m.mean_over_dim;
  }
  blk.sw = stats::sw_pass_rate(zs, opts.policy.q);
  if (blk.sw->skipped > 0)
    blk.notes.push_back(std::to_string(blk.sw->skipped) +
                        " Shapiro-Wilk dimensions skipped (fewer than 3 windows or constant)");
  blk.stamp = stamp_block(blk, opts.policy);
  return blk;
}

Stamp stamp_block(const CalibrationBlock& b, const StampPolicy& policy) {
  if (b.form == PredictionForm::Ensemble || !b.mahalanobis_ks || !b.sw || b.points == 0)
    return Stamp::NotApplicable;
  const double n = static_cast<double>(b.points);
  const bool cov50 = std::abs(b.coverage_50 - 0.5) <= policy.coverage_se * std::sqrt(0.25 / n);
  const bool cov90 = std::abs(b.coverage_90 - 0.9) <= policy.coverage_se * std::sqrt(0.09 / n);
  const bool ks = b.mahalanobis_ks->p_value > policy.ks_alpha;
  const bool sw = b.sw->tested > 0 && b.sw->rate >= 1.0 - policy.q - policy.sw_slack;
  return cov50 && cov90 && ks && sw ? Stamp::Pass : Stamp::Fail;
}

std::vector<PredictionRecord> oracle_predictions(const WindowSet& test, OracleKind kind) {
  const double sd = kind == OracleKind::TrueLaw ? test.sigma : 0.5 * test.sigma;
  std::vector<PredictionRecord> out;
  out.reserve(test.size());
  for (std::size_t w = 0; w < test.size(); ++w) {
    PredictionRecord r;
    r.window_id = test.ids[w];
    r.form = PredictionForm::SpectralBelief;
    for (Eigen::Index c = 0; c < test.dim(); ++c)
      r.beliefs.push_back(diagonal_belief(test.clean_targets[w].col(c),
                                          Eigen::VectorXd::Constant(test.horizon, sd)));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PredictionRecord> refmodel_predictions(const RefModel& model, const WindowSet& test) {
  std::vector<PredictionRecord> out;
  out.reserve(test.size());
  for (std::size_t w = 0; w < test.size(); ++w) {
    PredictionRecord r;
    r.window_id = test.ids[w];
    r.form = PredictionForm::SpectralBelief;
    r.beliefs = forecast(model, test.contexts[w]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string resolution_line(const std::vector<CalibrationBlock>& blocks) {
  std::vector<const CalibrationBlock*> sorted;
  for (const auto& b : blocks) sorted.push_back(&b);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto* a, const auto* b) { return a->sigma < b->sigma; });
  std::string pass, fail, na;
  for (const auto* b : sorted) {
    std::string& dst = b->stamp == Stamp::Pass ? pass : (b->stamp == Stamp::Fail ? fail : na);
    dst += (dst.empty() ? "" : ", ") + fmt(b->sigma);
  }
  std::string line = "resolution";
  if (!sorted.empty())
    line += " [" + sorted.front()->model + " on " + sorted.front()->scenario + ", H=" +
            std::to_string(sorted.front()->horizon) + "]";
  line += ": passes at sigma {" + pass + "}; fails at sigma {" + fail + "}";
  if (!na.empty()) line += "; not stamped at sigma {" + na + "}";
  return line;
}

std::string block_to_json(const CalibrationBlock& b) {
  json j;
  j["format"] = "dynbench-calibration-block";
  j["version"] = 1;
  j["scenario"] = b.scenario;
  j["model"] = b.model;
  j["sigma"] = b.sigma;
  j["horizon"] = b.horizon;
  j["form"] = to_string(b.form);
  j["windows_total"] = b.windows_total;
  j["windows_evaluated"] = b.windows_evaluated;
  j["windows_missing"] = b.windows_missing;
  j["points"] = b.points;
  j["coverage_50"] = b.coverage_50;
  j["coverage_90"] = b.coverage_90;
  j["crps"] = b.crps;
  j["mse"] = b.mse;
  j["sw"] = b.sw ? json{{"rate", b.sw->rate}, {"tested", b.sw->tested}, {"skipped", b.sw->skipped}}
                 : json(nullptr);
  j["pit_histogram"] = b.pit_histogram;
  j["pit_ks"] = b.pit_ks ? test_json(*b.pit_ks) : json(nullptr);
  j["mahalanobis_ks"] = b.mahalanobis_ks ? test_json(*b.mahalanobis_ks) : json(nullptr);
  j["mahalanobis_mean_over_dim"] =
      b.mahalanobis_mean_over_dim ? json(*b.mahalanobis_mean_over_dim) : json(nullptr);
  j["stamp"] = to_string(b.stamp);
  j["notes"] = b.notes;
  return j.dump(1);
}

CalibrationBlock block_from_json(std::string_view text) {
  const auto j = json::parse(text, nullptr, false);
  if (j.is_discarded() || j.value("format", "") != "dynbench-calibration-block")
    throw FormatError("not a calibration block");
  if (j.value("version", 0) != 1) throw FormatError("unsupported calibration block version");
  try {
    CalibrationBlock b;
    b.scenario = j.at("scenario");
    b.model = j.at("model");
    b.sigma = j.at("sigma");
    b.horizon = j.at("horizon");
    b.form = prediction_form_from_string(j.at("form").get<std::string>());
    b.windows_total = j.at("windows_total");
    b.windows_evaluated = j.at("windows_evaluated");
    b.windows_missing = j.at("windows_missing");
    b.points = j.at("points");
    b.coverage_50 = j.at("coverage_50");
    b.coverage_90 = j.at("coverage_90");
    b.crps = j.at("crps");
    b.mse = j.at("mse");
    if (!j.at("sw").is_null()) {
      stats::PassRate p;
      p.rate = j["sw"].at("rate");
      p.tested = j["sw"].at("tested");
      p.skipped = j["sw"].at("skipped");
      b.sw = p;
    }
    b.pit_histogram = j.at("pit_histogram").get<std::vector<std::size_t>>();
    if (!j.at("pit_ks").is_null()) b.pit_ks = test_from(j["pit_ks"]);
    if (!j.at("mahalanobis_ks").is_null()) b.mahalanobis_ks = test_from(j["mahalanobis_ks"]);
    if (!j.at("mahalanobis_mean_over_dim").is_null())
      b.mahalanobis_mean_over_dim = j["mahalanobis_mean_over_dim"].get<double>();
    const auto stamp = j.at("stamp").get<std::string>();
    b.stamp = stamp == "PASS" ? Stamp::Pass : (stamp == "FAIL" ? Stamp::Fail : Stamp::NotApplicable);
    b.notes = j.at("notes").get<std::vector<std::string>>();
    return b;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed calibration block: ") + e.what());
  }
}

}  // namespace dynbench
