#pragma once

// Reference computations used only by the tests. They go through dense
// matrices and textbook formulas, never through the library's eigenframe code.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "dynbench/belief.hpp"
#include "dynbench/rng.hpp"

namespace oracle {

// Dense U built from the reflections by explicit matrix products H_R ... H_1.
inline Eigen::MatrixXd householder_product(const Eigen::MatrixXd& hh) {
  const auto d = hh.cols();
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index k = 0; k < hh.rows(); ++k) {
    const Eigen::VectorXd v = hh.row(k).transpose();
    if (v.norm() < 1e-12) continue;
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(d, d) - 2.0 * v * v.transpose();
    u = h * u;
  }
  return u;
}

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline Moments dense_moments(const dynbench::Belief& b) {
  const Eigen::MatrixXd u = householder_product(b.hh_vectors);
  const Eigen::MatrixXd a = u * b.lambdas.asDiagonal() * u.transpose();
  Moments m;
  m.mean = a * b.t_y;
  if (b.location.size() != 0) m.mean += b.location;
  m.cov = a * a.transpose();
  return m;
}

// -log N(y; mu, cov) via a Cholesky factor.
inline double gaussian_nll(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, const Eigen::VectorXd& y) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd w = llt.matrixL().solve(y - mu);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double d = static_cast<double>(y.size());
  return 0.5 * (w.squaredNorm() + logdet + d * std::log(2.0 * std::numbers::pi));
}

inline Eigen::MatrixXd sqrtm_spd(const Eigen::MatrixXd& a) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

// General Gaussian W2^2: |m1 - m2|^2 + tr(S1 + S2 - 2 (S2^1/2 S1 S2^1/2)^1/2).
inline double w2_squared(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1, const Eigen::VectorXd& m2,
                         const Eigen::MatrixXd& s2) {
  const Eigen::MatrixXd r2 = sqrtm_spd(s2);
  const Eigen::MatrixXd cross = sqrtm_spd(r2 * s1 * r2);
  return (m1 - m2).squaredNorm() + (s1 + s2 - 2.0 * cross).trace();
}

inline dynbench::Belief random_belief(dynbench::Rng& rng, int d, int reflections) {
  dynbench::Belief b;
  b.t_y.resize(d);
  b.lambdas.resize(d);
  b.location.resize(d);
  for (int i = 0; i < d; ++i) {
    b.t_y(i) = 2.0 * rng.normal();
    b.lambdas(i) = 0.1 + 3.0 * rng.uniform();
    b.location(i) = rng.normal();
  }
  b.hh_vectors.resize(reflections, d);
  for (int k = 0; k < reflections; ++k) {
    for (int i = 0; i < d; ++i) b.hh_vectors(k, i) = rng.normal();
    b.hh_vectors.row(k).normalize();
  }
  return b;
}

inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace oracle
