#include "dynbench/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dynbench/io.hpp"
#include "dynbench/report.hpp"
#include "json.hpp"

namespace dynbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void append(WindowSet& dst, const WindowSet& src) {
  if (dst.empty() && dst.ids.empty()) {
    dst = src;
    return;
  }
  dst.starts.insert(dst.starts.end(), src.starts.begin(), src.starts.end());
  dst.ids.insert(dst.ids.end(), src.ids.begin(), src.ids.end());
  dst.contexts.insert(dst.contexts.end(), src.contexts.begin(), src.contexts.end());
  dst.targets.insert(dst.targets.end(), src.targets.begin(), src.targets.end());
  dst.clean_targets.insert(dst.clean_targets.end(), src.clean_targets.begin(), src.clean_targets.end());
}

std::ofstream open_out(const fs::path& p, bool binary = false) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ConfigError("cannot write " + p.string());
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string cell_name(const std::string& stem, double sigma, int h) {
  return stem + "_s" + sigma_token(sigma) + "_h" + std::to_string(h);
}

std::vector<PredictionRecord> predictions_for(const ExperimentConfig& cfg, const WindowSet& test,
                                              double sigma, int h, const RefModel* model) {
  switch (cfg.forecaster) {
    case ForecasterSource::Oracle:
      return oracle_predictions(test, cfg.oracle);
    case ForecasterSource::RefModel:
      return refmodel_predictions(*model, test);
    case ForecasterSource::External: {
      if (cfg.predictions.empty()) throw ConfigError("forecaster = external needs a predictions path");
      fs::path p = expand_pattern(cfg.predictions, sigma, h);
      if (p.is_relative() && !fs::exists(p)) p = run_dir(cfg) / p;
      std::ifstream in(p);
      if (!in) throw ConfigError("cannot open predictions file " + p.string());
      return read_predictions(in);
    }
  }
  return {};
}

}  // namespace

Scenario resolve_scenario(const ExperimentConfig& cfg) {
  Scenario s = find_scenario(cfg.scenario);
  if (cfg.seed) s.spec.rng_seed = *cfg.seed;
  return s;
}

std::vector<Trajectory> simulate_realizations(const ExperimentConfig& cfg) {
  const Scenario s = resolve_scenario(cfg);
  std::vector<Trajectory> out;
  for (int a = 0; a < cfg.trajectory_realizations; ++a)
    out.push_back(simulate(s.spec, s.shock, static_cast<std::uint64_t>(a)));
  return out;
}

WindowSplits pooled_windows(const ExperimentConfig& cfg, const std::vector<Trajectory>& trajs, double sigma,
                            int horizon) {
  TitrationLevel level;
  level.sigma_inj = sigma;
  level.noise_seed = cfg.noise_seed;
  level.validate();
  WindowSplits out;
  for (std::size_t a = 0; a < trajs.size(); ++a)
    for (int b = 0; b < cfg.noise_realizations; ++b) {
      const auto eval = titrate(trajs[a], level, cfg.context_length, horizon, cfg.stride_for(horizon), a,
                                static_cast<std::uint64_t>(b));
      append(out.val, eval.val);
      append(out.test, eval.test);
      if (cfg.train_stride == cfg.stride_for(horizon)) {
        append(out.train, eval.train);
      } else {
        const auto tr = titrate(trajs[a], level, cfg.context_length, horizon, cfg.train_stride, a,
                                static_cast<std::uint64_t>(b));
        append(out.train, tr.train);
      }
    }
  out.train.stride = cfg.train_stride;
  return out;
}

WindowSplits pooled_windows(const ExperimentConfig& cfg, double sigma, int horizon) {
  return pooled_windows(cfg, simulate_realizations(cfg), sigma, horizon);
}

std::string sigma_token(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", sigma);
  return buf;
}

std::string expand_pattern(std::string pattern, double sigma, int horizon) {
  auto replace = [&](const std::string& key, const std::string& val) {
    for (auto pos = pattern.find(key); pos != std::string::npos; pos = pattern.find(key, pos + val.size()))
      pattern.replace(pos, key.size(), val);
  };
  replace("{sigma}", sigma_token(sigma));
  replace("{h}", std::to_string(horizon));
  return pattern;
}

fs::path run_dir(const ExperimentConfig& cfg) { return output_root() / cfg.output_dir; }

std::string file_digest(const fs::path& file) {
  const std::string bytes = slurp(file);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<fs::path> run_generate(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = run_dir(cfg);
  const auto trajs = simulate_realizations(cfg);
  std::vector<fs::path> files;
  for (std::size_t a = 0; a < trajs.size(); ++a) {
    const bool bin = cfg.trajectory_format == "bin";
    const fs::path p = dir / ("trajectory_t" + std::to_string(a) + (bin ? ".bin" : ".csv"));
    auto out = open_out(p, bin);
    if (bin) write_trajectory_binary(trajs[a], out);
    else write_trajectory_csv(trajs[a], out);
    files.push_back(p);
  }
  for (double s : cfg.sigmas)
    for (int h : cfg.horizons) {
      const auto w = pooled_windows(cfg, trajs, s, h);
      for (Split sp : {Split::Train, Split::Val, Split::Test}) {
        const fs::path p = dir / (cell_name("windows_" + std::string(to_string(sp)), s, h) + ".jsonl");
        auto out = open_out(p);
        write_windows_jsonl(w[sp], out);
        files.push_back(p);
      }
    }

  json m;
  m["format"] = "dynbench-manifest";
  m["version"] = 1;
  m["scenario"] = cfg.scenario;
  const Scenario sc = resolve_scenario(cfg);
  m["seed"] = sc.spec.rng_seed;
  m["noise_seed"] = cfg.noise_seed;
  m["sigmas"] = cfg.sigmas;
  m["horizons"] = cfg.horizons;
  m["n_steps"] = sc.spec.n_steps;
  m["shock_step"] = trajs.front().shock_step ? json(*trajs.front().shock_step) : json(nullptr);
  m["config"] = write_config(cfg);
  auto digests = json::object();
  for (const auto& f : files) digests[f.filename().string()] = file_digest(f);
  m["files"] = digests;
  const fs::path mp = dir / "manifest.json";
  auto out = open_out(mp);
  out << m.dump(1) << '\n';
  files.push_back(mp);
  return files;
}

std::vector<fs::path> run_titrate(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = run_dir(cfg);
  const auto trajs = simulate_realizations(cfg);
  std::vector<fs::path> files;
  for (double s : cfg.sigmas)
    for (int h : cfg.horizons) {
      const auto w = pooled_windows(cfg, trajs, s, h);
      for (Split sp : {Split::Train, Split::Val, Split::Test}) {
        const fs::path p = dir / (cell_name("windows_" + std::string(to_string(sp)), s, h) + ".jsonl");
        auto out = open_out(p);
        write_windows_jsonl(w[sp], out);
        files.push_back(p);
      }
    }
  return files;
}

std::vector<fs::path> run_train_ref(const ExperimentConfig& cfg) {
  cfg.validate();
  const int h = cfg.horizons.front();
  RefModelHyper hyper = cfg.ref;
  hyper.context_length = cfg.context_length;
  hyper.horizon = h;
  const auto w = pooled_windows(cfg, cfg.train_sigma, h);
  const auto res = train(init_refmodel(hyper, static_cast<int>(w.train.dim())), w.train, w.val);
  const fs::path dir = run_dir(cfg);
  const fs::path ck = dir / "checkpoint.json", loss = dir / "loss.csv";
  {
    auto out = open_out(ck);
    save_checkpoint(res.model, out);
  }
  {
    auto out = open_out(loss);
    write_loss_csv(res.curve, out);
  }
  return {ck, loss};
}

std::vector<fs::path> run_oracle(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto trajs = simulate_realizations(cfg);
  std::vector<fs::path> files;
  for (double s : cfg.sigmas)
    for (int h : cfg.horizons) {
      const auto w = pooled_windows(cfg, trajs, s, h);
      const fs::path p =
          run_dir(cfg) / (cell_name("predictions_oracle-" + std::string(to_string(cfg.oracle)), s, h) + ".jsonl");
      auto out = open_out(p);
      write_predictions(oracle_predictions(w.test, cfg.oracle), out);
      files.push_back(p);
    }
  return files;
}

std::vector<CalibrationBlock> run_evaluate(const ExperimentConfig& cfg) {
  cfg.validate();
  std::optional<RefModel> model;
  if (cfg.forecaster == ForecasterSource::RefModel) {
    fs::path p = cfg.checkpoint.empty() ? run_dir(cfg) / "checkpoint.json" : fs::path(cfg.checkpoint);
    if (p.is_relative() && !fs::exists(p)) p = run_dir(cfg) / p;
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open checkpoint " + p.string());
    model = load_checkpoint(in);
  }
  const auto trajs = simulate_realizations(cfg);
  std::vector<CalibrationBlock> blocks;
  const fs::path dir = run_dir(cfg);
  for (int h : cfg.horizons)
    for (double s : cfg.sigmas) {
      if (model && model->hyper.horizon != h)
        throw ConfigError("checkpoint horizon " + std::to_string(model->hyper.horizon) +
                          " does not match H=" + std::to_string(h));
      const auto w = pooled_windows(cfg, trajs, s, h);
      const auto preds = predictions_for(cfg, w.test, s, h, model ? &*model : nullptr);
      auto blk = evaluate_predictions(w.test, preds, cfg.scenario, cfg.model_label(), cfg.eval);
      const fs::path p = dir / "blocks" / (cell_name(cfg.model_label(), s, h) + ".json");
      auto out = open_out(p);
      out << block_to_json(blk) << '\n';
      blocks.push_back(std::move(blk));
    }
  {
    auto out = open_out(dir / "report.md");
    write_report_markdown(blocks, out);
  }
  {
    auto out = open_out(dir / "report.csv");
    write_report_csv(blocks, out);
  }
  return blocks;
}

std::vector<fs::path> run_conformal(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto trajs = simulate_realizations(cfg);
  std::vector<fs::path> files;
  const fs::path dir = run_dir(cfg);
  for (double s : cfg.sigmas)
    for (int h : cfg.horizons) {
      const auto w = pooled_windows(cfg, trajs, s, h);
      RefModelHyper hyper = cfg.ref;
      hyper.context_length = cfg.context_length;
      hyper.horizon = h;
      const auto factory = refmodel_factory(hyper, static_cast<int>(w.train.dim()), w.val);
      const auto res = enbpi_intervals(factory, w.train, w.test, cfg.enbpi);
      const fs::path ip = dir / (cell_name("enbpi_intervals", s, h) + ".jsonl");
      const fs::path cp = dir / (cell_name("enbpi_coverage", s, h) + ".csv");
      {
        auto out = open_out(ip);
        write_intervals_jsonl(res, out);
      }
      {
        auto out = open_out(cp);
        write_coverage_csv(interval_coverage(res, w.test.targets), 1.0 - cfg.enbpi.alpha, out);
      }
      files.push_back(ip);
      files.push_back(cp);
    }
  return files;
}

std::vector<CalibrationBlock> run_report(const std::vector<fs::path>& block_files, const fs::path& out_dir) {
  if (block_files.empty()) throw ConfigError("report needs at least one calibration block");
  std::vector<CalibrationBlock> blocks;
  for (const auto& f : block_files) blocks.push_back(block_from_json(slurp(f)));
  {
    auto out = open_out(out_dir / "report.md");
    write_report_markdown(blocks, out);
  }
  {
    auto out = open_out(out_dir / "report.csv");
    write_report_csv(blocks, out);
  }
  return blocks;
}

ExperimentConfig config_from_manifest(const fs::path& manifest) {
  const auto j = json::parse(slurp(manifest), nullptr, false);
  if (j.is_discarded() || j.value("format", "") != "dynbench-manifest") throw FormatError("not a manifest");
  if (j.value("version", 0) != 1) throw FormatError("unsupported manifest version");
  std::istringstream in(j.at("config").get<std::string>());
  return parse_config(in);
}

}  // namespace dynbench
