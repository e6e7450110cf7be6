// dynbench command line: generate, titrate, train-ref, evaluate, report, oracle.
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "dynbench/pipeline.hpp"

using namespace dynbench;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string manifest;
  std::string scenario;
  std::vector<double> sigmas;
  std::vector<int> horizons;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "key = value config file");
  app->add_option("-m,--manifest", c.manifest, "manifest.json written by generate");
  app->add_option("-s,--scenario", c.scenario, "scenario id");
  app->add_option("--sigma", c.sigmas, "noise std (repeatable)");
  app->add_option("--horizon", c.horizons, "forecast horizon H (repeatable)");
  app->add_option("-o,--out", c.out, "run directory under $DYNBENCH_OUT");
  app->add_option("--seed", c.seed, "trajectory seed override");
}

ExperimentConfig build(const Common& c) {
  ExperimentConfig cfg;
  if (!c.config.empty() && !c.manifest.empty()) throw ConfigError("give --config or --manifest, not both");
  if (!c.config.empty()) cfg = load_config(c.config);
  if (!c.manifest.empty()) cfg = config_from_manifest(c.manifest);
  if (!c.scenario.empty()) cfg.scenario = c.scenario;
  if (!c.sigmas.empty()) cfg.sigmas = c.sigmas;
  if (!c.horizons.empty()) cfg.horizons = c.horizons;
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.seed) cfg.seed = c.seed;
  cfg.validate();
  find_scenario(cfg.scenario);
  return cfg;
}

void list(const std::vector<fs::path>& files) {
  for (const auto& f : files) std::cout << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynbench: dynamical-system forecasting calibration benchmark"};
  app.require_subcommand(1);

  Common gen_c, tit_c, trn_c, ev_c, orc_c, cf_c;
  std::string gen_format;
  auto* gen = app.add_subcommand("generate", "simulate a scenario, write trajectory, windows and manifest");
  add_common(gen, gen_c);
  gen->add_option("--format", gen_format, "trajectory export: csv or bin")->check(CLI::IsMember({"csv", "bin"}));

  auto* tit = app.add_subcommand("titrate", "write noisy train/val/test windows for each sigma and H");
  add_common(tit, tit_c);

  auto* trn = app.add_subcommand("train-ref", "train the reference model; writes checkpoint.json and loss.csv");
  add_common(trn, trn_c);

  std::string ev_forecaster, ev_preds, ev_ckpt, ev_oracle;
  auto* ev = app.add_subcommand("evaluate", "score a forecaster on the test windows; writes blocks and report");
  add_common(ev, ev_c);
  ev->add_option("--forecaster", ev_forecaster)->check(CLI::IsMember({"refmodel", "external", "oracle"}));
  ev->add_option("--predictions", ev_preds, "prediction JSONL path; {sigma} and {h} are substituted");
  ev->add_option("--checkpoint", ev_ckpt, "reference model checkpoint");
  ev->add_option("--oracle", ev_oracle, "oracle kind: true or half");

  std::vector<std::string> rep_files;
  std::string rep_out = ".";
  auto* rep = app.add_subcommand("report", "merge calibration block files into report.md and report.csv");
  rep->add_option("blocks", rep_files, "calibration block JSON files")->required();
  rep->add_option("-o,--out", rep_out, "output directory");

  std::string orc_kind;
  auto* orc = app.add_subcommand("oracle", "write oracle predictions in the exchange format");
  add_common(orc, orc_c);
  orc->add_option("--kind", orc_kind, "true or half");

  auto* cf = app.add_subcommand("conformal", "EnbPI intervals around the reference model mean");
  add_common(cf, cf_c);

  app.add_subcommand("scenarios", "list built-in scenario ids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      auto cfg = build(gen_c);
      if (!gen_format.empty()) cfg.trajectory_format = gen_format;
      list(run_generate(cfg));
    } else if (*tit) {
      list(run_titrate(build(tit_c)));
    } else if (*trn) {
      list(run_train_ref(build(trn_c)));
    } else if (*ev) {
      auto cfg = build(ev_c);
      if (!ev_forecaster.empty())
        cfg.forecaster = ev_forecaster == "refmodel"   ? ForecasterSource::RefModel
                         : ev_forecaster == "external" ? ForecasterSource::External
                                                       : ForecasterSource::Oracle;
      if (!ev_preds.empty()) {
        cfg.predictions = ev_preds;
        if (ev_forecaster.empty()) cfg.forecaster = ForecasterSource::External;
      }
      if (!ev_ckpt.empty()) {
        cfg.checkpoint = ev_ckpt;
        if (ev_forecaster.empty()) cfg.forecaster = ForecasterSource::RefModel;
      }
      if (!ev_oracle.empty()) cfg.oracle = oracle_kind_from_string(ev_oracle);
      const auto blocks = run_evaluate(cfg);
      for (const auto& b : blocks)
        std::cout << b.scenario << " sigma=" << b.sigma << " H=" << b.horizon << " cov50=" << b.coverage_50
                  << " cov90=" << b.coverage_90 << " stamp=" << to_string(b.stamp) << "\n";
      std::cout << resolution_line(blocks) << "\n";
    } else if (*rep) {
      std::vector<fs::path> files(rep_files.begin(), rep_files.end());
      run_report(files, rep_out);
      std::cout << (fs::path(rep_out) / "report.md").string() << "\n"
                << (fs::path(rep_out) / "report.csv").string() << "\n";
    } else if (*orc) {
      auto cfg = build(orc_c);
      if (!orc_kind.empty()) cfg.oracle = oracle_kind_from_string(orc_kind);
      list(run_oracle(cfg));
    } else if (*cf) {
      list(run_conformal(build(cf_c)));
    } else {
      for (const auto& id : scenario_ids()) std::cout << id << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "dynbench: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dynbench: unexpected error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
