#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dynbench/config.hpp"
#include "dynbench/evaluate.hpp"
#include "dynbench/exchange.hpp"
#include "dynbench/io.hpp"
#include "dynbench/pipeline.hpp"
#include "dynbench/report.hpp"
#include "dynbench/scenarios.hpp"

using namespace dynbench;
namespace fs = std::filesystem;

namespace {

WindowSet small_test_set(double sigma, std::uint64_t seed = 1) {
  auto sc = find_scenario("DOUBLEWELL_BASE");
  sc.spec.n_steps = 6000;
  const auto traj = simulate(sc.spec, sc.shock);
  TitrationLevel lvl;
  lvl.sigma_inj = sigma;
  lvl.noise_seed = seed;
  return titrate(traj, lvl, 64, 8, 4).test;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("dynbench_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Registry, KsIsOutOfScope) {
  try {
    find_scenario("KS_BASE");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("out of scope"), std::string::npos) << e.what();
  }
  EXPECT_THROW(find_scenario("KS_PARAM"), ConfigError);
}

TEST(Registry, UnknownListsIds) {
  try {
    find_scenario("NOPE");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("LORENZ_PARAM"), std::string::npos);
  }
}

TEST(Registry, AppendixRows) {
  const std::vector<std::string> expected = {
      "LORENZ63_MAIN", "ROSSLER_MAIN",     "CHUA_MAIN",       "LORENZ_BASE",       "LORENZ_PARAM",
      "LORENZ_STATE",  "LORENZ_SWITCH",    "ROSSLER_BASE",    "ROSSLER_PARAM",     "LORENZ96_BASE",
      "LORENZ96_SWITCH", "CHUA_BASE",      "CHUA_PARAM",      "CHUA_SWITCH",       "OU_BASE",
      "OU_PARAM",      "SLDS_BASE",        "SLDS_PARAM",      "SLDS_SWITCH",       "DOUBLEWELL_BASE",
      "DOUBLEWELL_PARAM", "DOUBLEWELL_SWITCH", "SEASONAL_AR_BASE", "SEASONAL_AR_PARAM", "GARCH_BASE",
      "GARCH_PARAM"};
  auto ids = scenario_ids();
  auto sorted_expected = expected;
  std::sort(ids.begin(), ids.end());
  std::sort(sorted_expected.begin(), sorted_expected.end());
  EXPECT_EQ(ids, sorted_expected);

  const auto& l = find_scenario("LORENZ_BASE");
  EXPECT_EQ(l.spec.n_steps, 35999);
  EXPECT_DOUBLE_EQ(l.spec.dt, 0.01);
  EXPECT_DOUBLE_EQ(l.spec.params.at("beta"), 8.0 / 3.0);
  const auto& sw = find_scenario("LORENZ_SWITCH");
  EXPECT_DOUBLE_EQ(sw.shock.param_updates.at("rho"), 28.1);
  EXPECT_TRUE(sw.shock.switch_state->isApprox(Eigen::Vector3d(1.002, 0.982, 1.102)));
  EXPECT_DOUBLE_EQ(find_scenario("LORENZ_STATE").shock.state_eps, 0.9);
  const auto& l96 = find_scenario("LORENZ96_SWITCH");
  EXPECT_EQ(l96.spec.dim, 6);
  EXPECT_DOUBLE_EQ(l96.spec.dt, 0.007);
  EXPECT_EQ(l96.spec.n_steps, 55000);
  EXPECT_DOUBLE_EQ(l96.shock.param_updates.at("forcing"), 9.0);
  const auto& chua = find_scenario("CHUA_PARAM");
  EXPECT_DOUBLE_EQ(chua.spec.dt, 0.005);
  EXPECT_DOUBLE_EQ(chua.shock.param_updates.at("m0"), -8.1 / 7.0);
  EXPECT_DOUBLE_EQ(chua.shock.param_updates.at("m1"), -5.2 / 7.0);
  const auto& ou = find_scenario("OU_PARAM");
  EXPECT_DOUBLE_EQ(ou.spec.dt, 0.5);
  EXPECT_EQ(ou.spec.n_steps, 25000);
  EXPECT_DOUBLE_EQ(ou.shock.param_updates.at("mu"), 0.5);
  const auto& slds = find_scenario("SLDS_BASE").spec.params;
  EXPECT_DOUBLE_EQ(slds.at("p11"), 0.94);
  EXPECT_DOUBLE_EQ(slds.at("Q2"), 0.35);
  EXPECT_DOUBLE_EQ(find_scenario("GARCH_PARAM").shock.param_updates.at("beta"), 0.70);
  for (const auto& s : scenario_registry()) {
    if (s.shock.kind != ShockKind::None) EXPECT_DOUBLE_EQ(s.shock.shock_frac, 0.35) << s.id;
  }
}

TEST(Config, RoundTrip) {
  ExperimentConfig c;
  c.scenario = "OU_PARAM";
  c.sigmas = {0.0, 0.125, 2.5};
  c.horizons = {16, 64};
  c.seed = 77;
  c.forecaster = ForecasterSource::RefModel;
  c.checkpoint = "ckpt.json";
  c.ref.epochs = 12;
  c.ref.context_scale = true;
  c.enbpi.block_len = 30;
  c.eval.policy.q = 0.1;
  const std::string text = write_config(c);
  std::istringstream in(text);
  EXPECT_EQ(write_config(parse_config(in)), text);
}

TEST(Config, ParsesCommentsAndRejectsUnknownKeys) {
  std::istringstream ok("# comment\nscenario = OU_BASE\n\nsigmas = 0, 0.5\nhorizons = 32\n");
  const auto c = parse_config(ok);
  EXPECT_EQ(c.scenario, "OU_BASE");
  EXPECT_EQ(c.sigmas, (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(c.stride_for(32), 16);
  std::istringstream bad("scenario = OU_BASE\nsigmaz = 1\n");
  EXPECT_THROW(parse_config(bad), ConfigError);
  std::istringstream empty("sigmas =\n");
  EXPECT_THROW(parse_config(empty), ConfigError);
}

TEST(Config, OutputRootFromEnvironment) {
  ::setenv("DYNBENCH_OUT", "/tmp/somewhere", 1);
  EXPECT_EQ(output_root(), fs::path("/tmp/somewhere"));
  ::unsetenv("DYNBENCH_OUT");
  EXPECT_EQ(output_root(), fs::path("dynbench_out"));
}

TEST(Exchange, RoundTripAllForms) {
  PredictionRecord s;
  s.window_id = "w1";
  s.form = PredictionForm::SpectralBelief;
  Belief b;
  b.t_y = Eigen::Vector3d(0.1, -0.2, 0.3);
  b.lambdas = Eigen::Vector3d(1.0, 0.5, 0.25);
  b.hh_vectors = Eigen::MatrixXd(1, 3);
  b.hh_vectors << 0.6, 0.8, 0.0;
  b.location = Eigen::Vector3d(1.0 / 3.0, 2.0, -1.0);
  s.beliefs = {b, b};

  PredictionRecord m;
  m.window_id = "w2";
  m.form = PredictionForm::MeanStd;
  m.mean = Eigen::MatrixXd::Random(3, 2);
  m.marginal_std = Eigen::MatrixXd::Constant(3, 2, 0.7);

  PredictionRecord e;
  e.window_id = "w3";
  e.form = PredictionForm::Ensemble;
  e.samples = {Eigen::MatrixXd::Random(3, 5), Eigen::MatrixXd::Random(3, 5)};

  std::stringstream io;
  write_predictions({s, m, e}, io);
  const auto back = read_predictions(io);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_TRUE(back[0].beliefs[1].hh_vectors == b.hh_vectors);
  EXPECT_TRUE(back[0].beliefs[0].location == b.location);
  EXPECT_TRUE(back[1].mean == m.mean);
  EXPECT_TRUE(back[2].samples[1] == e.samples[1]);
  EXPECT_EQ(encode_prediction(back[2]), encode_prediction(e));
}

TEST(Exchange, ReducedUnivariateForms) {
  const auto a = decode_prediction(
      R"({"version":1,"window_id":"x","form":"spectral","t_y":[0,0],"lambdas":[1,2],"hh_vectors":[]})");
  ASSERT_EQ(a.beliefs.size(), 1u);
  EXPECT_EQ(a.beliefs[0].lambdas(1), 2.0);
  const auto m = decode_prediction(
      R"({"version":1,"window_id":"x","form":"mean_std","mean":[1,2,3],"marginal_std":[0.1,0.2,0.3]})");
  EXPECT_EQ(m.mean.rows(), 3);
  EXPECT_EQ(m.mean.cols(), 1);
  EXPECT_THROW(decode_prediction(R"({"version":2,"window_id":"x","form":"mean_std","mean":[1],"marginal_std":[1]})"),
               FormatError);
  EXPECT_THROW(decode_prediction(R"({"version":1,"window_id":"x","form":"mean_std","mean":[1,2],"marginal_std":[1]})"),
               FormatError);
}

TEST(Evaluate, OracleStamps) {
  const auto test = small_test_set(0.25);
  const auto good = evaluate_predictions(test, oracle_predictions(test, OracleKind::TrueLaw), "DOUBLEWELL_BASE", "oracle-true");
  EXPECT_EQ(good.windows_total, test.size());
  EXPECT_EQ(good.points, test.size() * 8);
  ASSERT_TRUE(good.mahalanobis_ks);
  EXPECT_NEAR(*good.mahalanobis_mean_over_dim, 1.0, 0.1);
  const auto half = evaluate_predictions(test, oracle_predictions(test, OracleKind::HalfStd), "DOUBLEWELL_BASE", "oracle-half");
  EXPECT_EQ(half.stamp, Stamp::Fail);
  EXPECT_LT(half.coverage_90, 0.7);
}

TEST(Evaluate, MissingAccountingAndErrors) {
  const auto test = small_test_set(0.5);
  auto preds = oracle_predictions(test, OracleKind::TrueLaw);
  preds.pop_back();
  const auto blk = evaluate_predictions(test, preds, "DOUBLEWELL_BASE", "oracle-true");
  EXPECT_EQ(blk.windows_missing, 1u);
  EXPECT_EQ(blk.windows_evaluated + blk.windows_missing, blk.windows_total);
  EXPECT_FALSE(blk.notes.empty());

  preds.resize(preds.size() / 2);
  EXPECT_THROW(evaluate_predictions(test, preds, "s", "m"), SizingError);

  auto bad = oracle_predictions(test, OracleKind::TrueLaw);
  bad[0].window_id = "not-a-window";
  EXPECT_THROW(evaluate_predictions(test, bad, "s", "m"), FormatError);
}

TEST(Evaluate, EnsembleSkipsEigenframeTests) {
  const auto test = small_test_set(0.5);
  const auto beliefs = oracle_predictions(test, OracleKind::TrueLaw);
  std::vector<PredictionRecord> ens;
  Rng rng(3);
  for (const auto& p : beliefs) {
    PredictionRecord r;
    r.window_id = p.window_id;
    r.form = PredictionForm::Ensemble;
    r.samples = {sample(p.beliefs[0], rng, 64)};
    ens.push_back(std::move(r));
  }
  const auto blk = evaluate_predictions(test, ens, "DOUBLEWELL_BASE", "ens");
  EXPECT_EQ(blk.stamp, Stamp::NotApplicable);
  EXPECT_FALSE(blk.mahalanobis_ks);
  EXPECT_FALSE(blk.sw);
  ASSERT_FALSE(blk.notes.empty());
  EXPECT_NE(blk.notes.back().find("skipped"), std::string::npos);
  EXPECT_NEAR(blk.coverage_90, 0.9, 0.05);

  std::ostringstream md;
  write_report_markdown({blk}, md);
  EXPECT_NE(md.str().find("skipped"), std::string::npos);
}

TEST(Evaluate, MeanStdMatchesSpectralDiagonal) {
  const auto test = small_test_set(0.5);
  const auto spectral = oracle_predictions(test, OracleKind::TrueLaw);
  std::vector<PredictionRecord> ms;
  for (const auto& p : spectral) {
    PredictionRecord r;
    r.window_id = p.window_id;
    r.form = PredictionForm::MeanStd;
    r.mean = belief_mean(p.beliefs[0]);
    r.marginal_std = marginal_std(p.beliefs[0]);
    ms.push_back(std::move(r));
  }
  const auto a = evaluate_predictions(test, spectral, "s", "m");
  const auto b = evaluate_predictions(test, ms, "s", "m");
  EXPECT_EQ(a.coverage_50, b.coverage_50);
  EXPECT_DOUBLE_EQ(a.crps, b.crps);
  EXPECT_DOUBLE_EQ(a.mahalanobis_ks->statistic, b.mahalanobis_ks->statistic);
}

TEST(Evaluate, BlockJsonRoundTrip) {
  const auto test = small_test_set(0.25);
  const auto blk = evaluate_predictions(test, oracle_predictions(test, OracleKind::TrueLaw), "DOUBLEWELL_BASE", "oracle-true");
  const auto text = block_to_json(blk);
  EXPECT_EQ(block_to_json(block_from_json(text)), text);
  EXPECT_THROW(block_from_json("{\"format\":\"x\"}"), FormatError);
}

TEST(Report, TwelveRowGridAndDashes) {
  std::vector<CalibrationBlock> blocks;
  for (double s : {0.0, 0.25, 1.0, 2.0}) {
    CalibrationBlock b;
    b.scenario = "DOUBLEWELL_BASE";
    b.model = "m";
    b.sigma = s;
    b.horizon = 64;
    b.points = 100;
    b.coverage_50 = 0.5;
    b.coverage_90 = 0.9;
    if (s > 0) b.sw = stats::PassRate{0.95, 64, 0};
    blocks.push_back(b);
  }
  std::ostringstream csv;
  write_report_csv(blocks, csv, {"cov50", "cov90", "sw_pass_rate"});
  const auto rows = lines_of(csv.str());
  ASSERT_EQ(rows.size(), 13u);
  EXPECT_EQ(rows[0], "scenario,sigma,metric,value,ci_lo,ci_hi");
  // sigma 0 has no SW result
  bool dash = false;
  for (const auto& r : rows)
    if (r.rfind("DOUBLEWELL_BASE,0.00,sw_pass_rate,—,—,—", 0) == 0) dash = true;
  EXPECT_TRUE(dash) << csv.str();

  std::ostringstream one;
  write_report_csv({blocks[1]}, one, {"cov50"});
  EXPECT_EQ(lines_of(one.str()).size(), 2u);
  EXPECT_THROW(write_report_csv(blocks, one, {"bogus"}), ConfigError);
}

TEST(Report, ResolutionLine) {
  std::vector<CalibrationBlock> blocks(3);
  const double sig[] = {0.001, 0.0001, 0.01};
  const Stamp st[] = {Stamp::Pass, Stamp::Fail, Stamp::Pass};
  for (int i = 0; i < 3; ++i) {
    blocks[i].scenario = "S";
    blocks[i].model = "M";
    blocks[i].horizon = 8;
    blocks[i].sigma = sig[i];
    blocks[i].stamp = st[i];
  }
  EXPECT_EQ(resolution_line(blocks), "resolution [M on S, H=8]: passes at sigma {0.001, 0.01}; fails at sigma {0.0001}");
}

TEST(Io, TrajectoryFormats) {
  auto sc = find_scenario("LORENZ_PARAM");
  sc.spec.n_steps = 100;
  const auto traj = simulate(sc.spec, sc.shock);
  std::stringstream csv;
  write_trajectory_csv(traj, csv);
  const auto rows = lines_of(csv.str());
  EXPECT_EQ(rows[0], "# dynbench-trajectory v1");
  EXPECT_EQ(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.empty() && r[0] != '#'; }), 101);

  std::stringstream bin;
  write_trajectory_binary(traj, bin);
  const auto back = read_trajectory_binary(bin);
  EXPECT_TRUE(back.values == traj.values.cast<float>());
  EXPECT_NE(back.header.find("\"shock_step\":35"), std::string::npos) << back.header;
}

TEST(Io, WindowsRoundTrip) {
  const auto test = small_test_set(0.25);
  std::stringstream io;
  write_windows_jsonl(test, io);
  const auto back = read_windows_jsonl(io);
  ASSERT_EQ(back.size(), test.size());
  EXPECT_EQ(back.ids, test.ids);
  EXPECT_EQ(back.starts, test.starts);
  EXPECT_EQ(back.sigma, test.sigma);
  for (std::size_t i = 0; i < test.size(); ++i) {
    EXPECT_TRUE(back.targets[i] == test.targets[i]);
    EXPECT_TRUE(back.clean_targets[i] == test.clean_targets[i]);
  }
}

TEST(Pipeline, GenerateIsReproducible) {
  const auto root = scratch_dir("generate");
  ::setenv("DYNBENCH_OUT", root.c_str(), 1);
  ExperimentConfig c;
  c.scenario = "OU_BASE";
  c.sigmas = {0.25};
  c.horizons = {8};
  c.context_length = 32;
  c.noise_realizations = 1;
  c.output_dir = "a";
  const auto files_a = run_generate(c);
  c.output_dir = "b";
  const auto files_b = run_generate(c);
  ASSERT_EQ(files_a.size(), files_b.size());
  for (std::size_t i = 0; i < files_a.size(); ++i) {
    if (files_a[i].filename() == "manifest.json") continue;
    EXPECT_EQ(file_digest(files_a[i]), file_digest(files_b[i])) << files_a[i];
  }
  const auto again = config_from_manifest(root / "a" / "manifest.json");
  EXPECT_EQ(again.scenario, "OU_BASE");
  EXPECT_EQ(again.horizons, std::vector<int>{8});
  c.scenario = "KS_BASE";
  EXPECT_THROW(run_generate(c), ConfigError);
  ::unsetenv("DYNBENCH_OUT");
  fs::remove_all(root);
}
