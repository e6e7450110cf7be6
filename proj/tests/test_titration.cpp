#include <gtest/gtest.h>

#include "dynbench/scenarios.hpp"
#include "dynbench/titration.hpp"

using namespace dynbench;

namespace {

Eigen::MatrixXd ramp(Eigen::Index n, Eigen::Index dim = 1) {
  Eigen::MatrixXd m(n, dim);
  for (Eigen::Index t = 0; t < n; ++t)
    for (Eigen::Index j = 0; j < dim; ++j) m(t, j) = static_cast<double>(t) + 0.5 * static_cast<double>(j);
  return m;
}

Trajectory ou_trajectory(std::int64_t steps) {
  auto sc = find_scenario("OU_BASE");
  sc.spec.n_steps = steps;
  return simulate(sc.spec, sc.shock);
}

}  // namespace

TEST(Noise, ZeroSigmaIsIdentity) {
  const Eigen::MatrixXd x = ramp(50, 2);
  const auto out = inject_noise(x, {0.0, 3, {}});
  EXPECT_TRUE(out.noisy == x);
  EXPECT_TRUE(out.clean == x);
}

TEST(Noise, NegativeSigmaRejected) {
  TitrationLevel l;
  l.sigma_inj = -0.1;
  EXPECT_THROW(l.validate(), ConfigError);
}

TEST(Noise, SeedsChangeNoiseNotSignal) {
  const Eigen::MatrixXd x = ramp(200);
  const auto a = inject_noise(x, {0.5, 1, {}});
  const auto b = inject_noise(x, {0.5, 2, {}});
  EXPECT_TRUE(a.clean == b.clean);
  EXPECT_FALSE(a.noisy == b.noisy);
}

TEST(Noise, ScheduleOverridesConstant) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 1);
  TitrationLevel l{1.0, 9, {0.0, 0.0, 2.0, 0.0}};
  const auto out = inject_noise(x, l);
  EXPECT_EQ(out.noisy(0, 0), 0.0);
  EXPECT_EQ(out.noisy(3, 0), 0.0);
  EXPECT_NE(out.noisy(2, 0), 0.0);
  l.schedule = {1.0};
  EXPECT_THROW(inject_noise(x, l), SizingError);
}

TEST(Split, TrainEndsBeforeSeventyPercent) {
  const Eigen::MatrixXd x = ramp(10000);
  const auto s = split_and_window(x, {}, 336, 64, 1);
  ASSERT_FALSE(s.train.empty());
  for (std::size_t i = 0; i < s.train.size(); ++i) EXPECT_LE(s.train.starts[i] + 336 + 64, 7000);
  EXPECT_LE(s.train.targets.back()(63, 0), 6999.0);
}

TEST(Split, TestWindowCount) {
  for (Eigen::Index n : {4000, 4321, 5000}) {
    for (int stride : {1, 7, 32}) {
      const auto s = split_and_window(ramp(n), {}, 336, 64, stride);
      const auto b = split_bounds(n);
      const Eigen::Index seg = n - b.val_end;
      const Eigen::Index expected = (seg - 336 - 64) / stride + 1;
      EXPECT_EQ(static_cast<Eigen::Index>(s.test.size()), expected) << n << " " << stride;
    }
  }
}

TEST(Split, NoLeakAcrossBoundaries) {
  const Eigen::Index n = 6000;
  const auto s = split_and_window(ramp(n), {}, 100, 20, 3);
  const auto b = split_bounds(n);
  for (Split sp : {Split::Train, Split::Val, Split::Test}) {
    const auto& w = s[sp];
    for (std::size_t i = 0; i < w.size(); ++i) {
      EXPECT_GE(w.contexts[i](0, 0), static_cast<double>(b.begin(sp)));
      EXPECT_LT(w.targets[i](19, 0), static_cast<double>(b.end(sp)));
      // context and target are contiguous
      EXPECT_EQ(w.targets[i](0, 0), w.contexts[i](99, 0) + 1.0);
    }
  }
}

TEST(Split, TooShortNamesMinimum) {
  try {
    split_and_window(ramp(300), {}, 336, 64, 1);
    FAIL();
  } catch (const SizingError& e) {
    EXPECT_NE(std::string(e.what()).find("need at least"), std::string::npos);
  }
}

TEST(Split, ShockInsideTrainSegment) {
  // shock_frac 0.35 is the midpoint of the 70% training segment
  const auto& sc = find_scenario("OU_PARAM");
  const auto step = *sc.shock.step(sc.spec.n_steps);
  const auto b = split_bounds(sc.spec.n_steps);
  EXPECT_NEAR(static_cast<double>(step), 0.5 * static_cast<double>(b.train_end), 1.0);
}

TEST(Titrate, CleanPlusNoiseIsTarget) {
  const auto traj = ou_trajectory(6000);
  const auto s = titrate(traj, {0.5, 77, {}}, 200, 40, 40);
  double sum2 = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.test.size(); ++i) {
    const Eigen::MatrixXd eps = s.test.targets[i] - s.test.clean_targets[i];
    // clean target is the trajectory itself
    const auto start = s.test.starts[i] + 200;
    EXPECT_TRUE(s.test.clean_targets[i] == traj.values.middleRows(start, 40));
    sum2 += eps.squaredNorm();
    n += static_cast<std::size_t>(eps.size());
  }
  EXPECT_NEAR(std::sqrt(sum2 / static_cast<double>(n)), 0.5, 0.05);
}

TEST(Titrate, SplitsUseIndependentNoise) {
  const auto traj = ou_trajectory(6000);
  const auto a = titrate(traj, {0.5, 77, {}}, 200, 40, 40, 0, 0);
  const auto b = titrate(traj, {0.5, 77, {}}, 200, 40, 40, 0, 1);
  EXPECT_FALSE(a.test.targets[0] == b.test.targets[0]);
  EXPECT_TRUE(a.test.clean_targets[0] == b.test.clean_targets[0]);
  const auto c = titrate(traj, {0.5, 77, {}}, 200, 40, 40, 0, 0);
  EXPECT_TRUE(a.test.targets[0] == c.test.targets[0]);
  EXPECT_NE(a.test.ids[0], b.test.ids[0]);
}
