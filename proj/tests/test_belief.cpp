#include <gtest/gtest.h>

#include <limits>

#include "dynbench/belief.hpp"
#include "dynbench/stats.hpp"
#include "oracles.hpp"

using namespace dynbench;

namespace {

Belief identity_belief(int d) {
  Belief b;
  b.t_y = Eigen::VectorXd::Zero(d);
  b.lambdas = Eigen::VectorXd::Ones(d);
  b.hh_vectors.resize(0, d);
  return b;
}

}  // namespace

TEST(Rotation, SingleReflection) {
  Eigen::MatrixXd hh(1, 3);
  hh << 1, 0, 0;
  const Eigen::Vector3d x(1, 2, 3);
  EXPECT_TRUE(apply_rotation(hh, x, false).isApprox(Eigen::Vector3d(-1, 2, 3)));
}

TEST(Rotation, NoReflectionsIsIdentity) {
  const Eigen::MatrixXd hh(0, 3);
  const Eigen::Vector3d x(1, 2, 3);
  EXPECT_TRUE(apply_rotation(hh, x, true) == x);
}

TEST(Rotation, NonUnitGeneratorRejected) {
  Eigen::MatrixXd hh(1, 2);
  hh << 1.0, 1.0;
  Eigen::Vector2d x(1, 0);
  EXPECT_THROW(apply_rotation(hh, x, false), DomainError);
}

TEST(Rotation, DegenerateGeneratorIsIdentity) {
  Eigen::MatrixXd hh = Eigen::MatrixXd::Zero(1, 2);
  hh(0, 0) = 1e-14;
  Eigen::Vector2d x(1, 2);
  EXPECT_TRUE(apply_rotation(hh, x, false) == x);
}

TEST(Rotation, OrthogonalAndMatchesDenseProduct) {
  Rng rng(11);
  for (int d : {2, 5, 16, 64}) {
    const auto b = oracle::random_belief(rng, d, 24);
    const Eigen::MatrixXd u = rotation_matrix(b);
    EXPECT_LT((u.transpose() * u - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((u - oracle::householder_product(b.hh_vectors)).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(d, -1, 2);
    EXPECT_TRUE(apply_rotation(b.hh_vectors, x, true).isApprox(u.transpose() * x, 1e-12));
  }
}

TEST(Moments, Examples) {
  auto b = identity_belief(2);
  b.t_y << 1, 0;
  EXPECT_TRUE(belief_mean(b).isApprox(Eigen::Vector2d(1, 0)));
  EXPECT_TRUE(belief_covariance(b).isApprox(Eigen::Matrix2d::Identity()));

  b.lambdas << 2, 1;
  Eigen::Matrix2d expect;
  expect << 4, 0, 0, 1;
  EXPECT_TRUE(belief_covariance(b).isApprox(expect));
}

TEST(Moments, MatchDenseOracle) {
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const auto b = oracle::random_belief(rng, 6, 4);
    const auto m = oracle::dense_moments(b);
    EXPECT_TRUE(belief_mean(b).isApprox(m.mean, 1e-12));
    EXPECT_TRUE(belief_covariance(b).isApprox(m.cov, 1e-12));
    EXPECT_TRUE(marginal_std(b).isApprox(m.cov.diagonal().cwiseSqrt(), 1e-12));
  }
}

TEST(Sampling, ZeroLambdaCollapsesToLocation) {
  auto b = identity_belief(3);
  b.lambdas.setZero();
  b.t_y << 4, 5, 6;
  Rng rng(3);
  const Eigen::MatrixXd y = sample(b, rng, 10);
  EXPECT_TRUE(y.isZero());
}

TEST(Sampling, FixedSeedReproduces) {
  Rng r0(5);
  const auto b = oracle::random_belief(r0, 4, 3);
  Rng a(9, 1), c(9, 1);
  EXPECT_TRUE(sample(b, a, 50) == sample(b, c, 50));
}

TEST(Sampling, MomentsConverge) {
  Rng r0(6);
  const auto b = oracle::random_belief(r0, 3, 3);
  const auto m = oracle::dense_moments(b);
  Rng rng(7);
  const int S = 200000;
  const Eigen::MatrixXd y = sample(b, rng, S);
  const Eigen::VectorXd mean = y.rowwise().mean();
  const Eigen::MatrixXd c = y.colwise() - mean;
  const Eigen::MatrixXd cov = c * c.transpose() / (S - 1);
  const double scale = m.cov.diagonal().maxCoeff();
  EXPECT_LT((mean - m.mean).cwiseAbs().maxCoeff(), 0.02 * std::sqrt(scale));
  EXPECT_LT((cov - m.cov).cwiseAbs().maxCoeff(), 0.02 * scale);
}

TEST(Nll, Examples) {
  auto b = identity_belief(1);
  EXPECT_NEAR(nll(b, Eigen::VectorXd::Zero(1)), 0.918939, 1e-6);
  b.lambdas(0) = 2.0;
  // 0.5 (log 4 + 1) + 0.5 log 2 pi = 2.1120857...
  EXPECT_NEAR(nll(b, Eigen::VectorXd::Constant(1, 2.0)), 0.5 * (std::log(4.0) + 1.0) + 0.918938533204673, 1e-12);
}

TEST(Nll, MatchesDenseDensity) {
  Rng rng(13);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int d = 1 + static_cast<int>(rng.below(8));
    const auto b = oracle::random_belief(rng, d, 1 + static_cast<int>(rng.below(10)));
    Eigen::VectorXd y(d);
    for (int k = 0; k < d; ++k) y(k) = 3.0 * rng.normal();
    const auto m = oracle::dense_moments(b);
    worst = std::max(worst, std::abs(nll(b, y) - oracle::gaussian_nll(m.mean, m.cov, y)));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Nll, LambdaFloor) {
  auto b = identity_belief(1);
  b.lambdas(0) = 0.0;
  const double v = nll(b, Eigen::VectorXd::Zero(1));
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, std::log(kLambdaMin) + 0.5 * std::log(2 * std::numbers::pi), 1e-12);
}

TEST(Whiten, AtMeanIsZero) {
  Rng rng(14);
  const auto b = oracle::random_belief(rng, 5, 5);
  const auto r = whiten(b, belief_mean(b));
  EXPECT_LT(r.z.norm(), 1e-12);
  EXPECT_LT(r.mahalanobis(), 1e-24);
}

TEST(Whiten, CalibratedDrawsFollowChiSquare) {
  Rng r0(15);
  const auto b = oracle::random_belief(r0, 4, 6);
  Rng rng(16);
  const Eigen::MatrixXd y = sample(b, rng, 10000);
  std::vector<double> u(10000);
  for (int s = 0; s < 10000; ++s) u[s] = stats::chi2_cdf(whiten(b, y.col(s)).mahalanobis(), 4);
  EXPECT_GT(stats::ks_uniform(u).p_value, 0.01);
}

TEST(W2, IdenticalIsZero) {
  auto b = identity_belief(3);
  b.lambdas.setConstant(0.7);
  EXPECT_NEAR(wasserstein2_squared(b, Eigen::VectorXd::Zero(3), 0.49), 0.0, 1e-14);
}

TEST(W2, MatchesGeneralFormula) {
  Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    const int d = 1 + static_cast<int>(rng.below(4));
    const auto b = oracle::random_belief(rng, d, 3);
    Eigen::VectorXd m(d);
    for (int k = 0; k < d; ++k) m(k) = rng.normal();
    const double var = 0.2 + rng.uniform();
    const auto mo = oracle::dense_moments(b);
    const double dense = oracle::w2_squared(mo.mean, mo.cov, m, var * Eigen::MatrixXd::Identity(d, d));
    EXPECT_NEAR(wasserstein2_squared(b, m, var), dense, 1e-9);
  }
  auto b = identity_belief(1);
  EXPECT_THROW(wasserstein2_squared(b, Eigen::VectorXd::Zero(1), -1.0), DomainError);
}

TEST(SoftBound, Contract) {
  EXPECT_NEAR(soft_bound(1.75, kScaleLo, kScaleHi), 1.75, 1e-3);
  for (double x = 0.375; x <= 3.125; x += 0.01) EXPECT_LT(std::abs(soft_bound(x, kScaleLo, kScaleHi) - x), 1e-3);
  EXPECT_NEAR(soft_bound(1e6, kScaleLo, kScaleHi), kScaleHi, 1e-9);
  EXPECT_NEAR(soft_bound(-1e6, kScaleLo, kScaleHi), kScaleLo, 1e-9);
  double prev = -std::numeric_limits<double>::infinity();
  for (double x = -30; x <= 30; x += 0.05) {
    const double y = soft_bound(x, kScaleLo, kScaleHi);
    EXPECT_GE(y, prev);
    EXPECT_GE(y, kScaleLo);
    EXPECT_LE(y, kScaleHi);
    prev = y;
  }
  // lambda = 1 + c spans [0, 5.5]
  EXPECT_NEAR(1.0 + soft_bound(-1e9, kScaleLo, kScaleHi), 0.0, 1e-12);
  EXPECT_NEAR(1.0 + soft_bound(1e9, kScaleLo, kScaleHi), 5.5, 1e-12);
  EXPECT_NEAR(soft_bound(100.0, kTranslationLo, kTranslationHi), 15.0, 1e-6);
  EXPECT_THROW(soft_bound(0.0, 1.0, 1.0), ConfigError);
}

TEST(SoftBound, DerivativeAndInverse) {
  for (double x : {-9.0, -1.3, 0.0, 2.0, 3.2, 4.0, 8.0}) {
    const double h = 1e-6;
    const double fd = (soft_bound(x + h, kScaleLo, kScaleHi) - soft_bound(x - h, kScaleLo, kScaleHi)) / (2 * h);
    EXPECT_NEAR(soft_bound_derivative(x, kScaleLo, kScaleHi), fd, 1e-7);
    if (std::abs(x) < 6)
      EXPECT_NEAR(soft_bound_inverse(soft_bound(x, kScaleLo, kScaleHi), kScaleLo, kScaleHi), x, 1e-9);
  }
}

TEST(Validate, RejectsBadBeliefs) {
  auto b = identity_belief(2);
  b.lambdas(1) = -0.5;
  EXPECT_THROW(validate(b), DomainError);
  b = identity_belief(2);
  b.t_y.resize(3);
  EXPECT_THROW(validate(b), DimensionError);
}
