#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>

#include "dynbench/error.hpp"
#include "dynbench/rng.hpp"

namespace dynbench {

/// Generators below this norm act as identity reflections.
inline constexpr double kDegenerateGeneratorNorm = 1e-12;
/// Allowed deviation from unit norm for a Householder generator.
inline constexpr double kUnitNormTolerance = 1e-8;
/// Eigenvalue floor applied by nll() and whiten().
inline constexpr double kLambdaMin = 1e-6;

inline constexpr double kScaleLo = -1.0;
inline constexpr double kScaleHi = 4.5;
inline constexpr double kTranslationLo = -15.0;
inline constexpr double kTranslationHi = 15.0;
inline constexpr int kDefaultReflections = 24;

/// Gaussian predictive law N(mu, Sigma) held in spectral form:
///   y = location + U Lambda U^T (y0 + t_y),  y0 ~ N(0, I)
///   mu = location + U Lambda U^T t_y,  Sigma = U Lambda^2 U^T
/// with U = H_R ... H_1 a product of Householder reflections whose unit
/// generators are the rows of hh_vectors. An empty location means zero.
template <typename Scalar>
struct GaussianBelief {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector t_y;
  Vector lambdas;
  Matrix hh_vectors;  // R x d
  Vector location;

  Eigen::Index dim() const { return lambdas.size(); }
  Eigen::Index reflections() const { return hh_vectors.rows(); }
};

using Belief = GaussianBelief<double>;

/// Residual in the predicted eigenframe and its whitened form.
template <typename Scalar>
struct EigenResidual {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z;

  Scalar mahalanobis() const { return z.squaredNorm(); }
};

// ---------------------------------------------------------------------------
// Soft bounds.

/// Smooth monotone map into (lo, hi): the identity on the central half of
/// [lo, hi], and tanh saturation of width (hi - lo) / 4 on either side. The
/// pieces join with matching value, slope and curvature.
template <typename Scalar>
Scalar soft_bound(Scalar x, double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("soft_bound requires lo < hi");
  using std::tanh;
  const double q = 0.25 * (hi - lo);
  const double inner_lo = lo + q, inner_hi = hi - q;
  if (x > inner_hi) return Scalar(inner_hi) + Scalar(q) * tanh((x - Scalar(inner_hi)) / Scalar(q));
  if (x < inner_lo) return Scalar(inner_lo) - Scalar(q) * tanh((Scalar(inner_lo) - x) / Scalar(q));
  return x;
}

/// d soft_bound / dx.
inline double soft_bound_derivative(double x, double lo, double hi) {
  const double q = 0.25 * (hi - lo);
  const double inner_lo = lo + q, inner_hi = hi - q;
  double u = 0.0;
  if (x > inner_hi) u = (x - inner_hi) / q;
  else if (x < inner_lo) u = (inner_lo - x) / q;
  const double th = std::tanh(u);
  return 1.0 - th * th;
}

/// Inverse of soft_bound on the open interval (lo, hi).
inline double soft_bound_inverse(double y, double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("soft_bound requires lo < hi");
  if (!(y > lo && y < hi)) throw DomainError("soft_bound_inverse argument outside (lo, hi)");
  const double q = 0.25 * (hi - lo);
  const double inner_lo = lo + q, inner_hi = hi - q;
  if (y > inner_hi) return inner_hi + q * std::atanh((y - inner_hi) / q);
  if (y < inner_lo) return inner_lo - q * std::atanh((inner_lo - y) / q);
  return y;
}

// ---------------------------------------------------------------------------
// Householder frame.

namespace detail {

template <typename Derived>
bool reflect_is_identity(const Eigen::MatrixBase<Derived>& v) {
  using std::sqrt;
  const auto norm2 = v.squaredNorm();
  if (norm2 < kDegenerateGeneratorNorm * kDegenerateGeneratorNorm) return true;
  if (std::abs(static_cast<double>(sqrt(norm2)) - 1.0) > kUnitNormTolerance)
    throw DomainError("Householder generator is not unit norm");
  return false;
}

}  // namespace detail

/// Applies U (or U^T) to the columns of x in place as a sequence of
/// reflections x <- x - 2 v (v^T x), never forming the d x d matrix.
template <typename GenDerived, typename XDerived>
void apply_rotation_inplace(const Eigen::MatrixBase<GenDerived>& hh,
                            Eigen::MatrixBase<XDerived>& x, bool transpose) {
  const Eigen::Index R = hh.rows();
  if (R > 0 && hh.cols() != x.rows())
    throw DimensionError("Householder generators and vector differ in length");
  for (Eigen::Index i = 0; i < R; ++i) {
    // U = H_R ... H_1: U x applies H_1 first, U^T x applies H_R first.
    const Eigen::Index k = transpose ? R - 1 - i : i;
    const auto v = hh.row(k).transpose();
    if (detail::reflect_is_identity(v)) continue;
    x.derived() -= 2.0 * v * (v.transpose() * x.derived());
  }
}

template <typename GenDerived, typename XDerived>
Eigen::Matrix<typename XDerived::Scalar, Eigen::Dynamic, XDerived::ColsAtCompileTime> apply_rotation(
    const Eigen::MatrixBase<GenDerived>& hh, const Eigen::MatrixBase<XDerived>& x, bool transpose) {
  Eigen::Matrix<typename XDerived::Scalar, Eigen::Dynamic, XDerived::ColsAtCompileTime> out = x;
  apply_rotation_inplace(hh, out, transpose);
  return out;
}

/// Dense U, for diagnostics and oracles.
template <typename Scalar>
typename GaussianBelief<Scalar>::Matrix rotation_matrix(const GaussianBelief<Scalar>& b) {
  typename GaussianBelief<Scalar>::Matrix u =
      GaussianBelief<Scalar>::Matrix::Identity(b.dim(), b.dim());
  apply_rotation_inplace(b.hh_vectors, u, false);
  return u;
}

/// Rows rescaled to unit norm; rows below the degenerate threshold become zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> normalize_generators(
    const Eigen::MatrixBase<Derived>& raw) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out = raw;
  for (Eigen::Index k = 0; k < out.rows(); ++k) {
    const auto n = out.row(k).norm();
    if (n < kDegenerateGeneratorNorm) out.row(k).setZero();
    else out.row(k) /= n;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Moments.

template <typename Scalar>
void validate(const GaussianBelief<Scalar>& b) {
  const auto d = b.dim();
  if (b.t_y.size() != d) throw DimensionError("t_y and lambdas differ in length");
  if (b.reflections() > 0 && b.hh_vectors.cols() != d)
    throw DimensionError("Householder generators have wrong length");
  if (b.location.size() != 0 && b.location.size() != d)
    throw DimensionError("location has wrong length");
  if ((b.lambdas.array() < Scalar(0)).any()) throw DomainError("negative eigenvalue");
  for (Eigen::Index k = 0; k < b.reflections(); ++k)
    detail::reflect_is_identity(b.hh_vectors.row(k).transpose());
}

template <typename Scalar>
typename GaussianBelief<Scalar>::Vector belief_mean(const GaussianBelief<Scalar>& b) {
  typename GaussianBelief<Scalar>::Vector m = apply_rotation(b.hh_vectors, b.t_y, true);
  m.array() *= b.lambdas.array();
  apply_rotation_inplace(b.hh_vectors, m, false);
  if (b.location.size() != 0) m += b.location;
  return m;
}

template <typename Scalar>
typename GaussianBelief<Scalar>::Matrix belief_covariance(const GaussianBelief<Scalar>& b) {
  const auto u = rotation_matrix(b);
  return u * b.lambdas.array().square().matrix().asDiagonal() * u.transpose();
}

/// sqrt(diag Sigma) without forming Sigma.
template <typename Scalar>
typename GaussianBelief<Scalar>::Vector marginal_std(const GaussianBelief<Scalar>& b) {
  const auto u = rotation_matrix(b);
  return (u.array().square().matrix() * b.lambdas.array().square().matrix()).array().sqrt();
}

// ---------------------------------------------------------------------------
// Likelihood and whitening.

template <typename Scalar, typename Derived>
EigenResidual<Scalar> whiten(const GaussianBelief<Scalar>& b, const Eigen::MatrixBase<Derived>& y) {
  if (y.size() != b.dim()) throw DimensionError("observation length does not match belief");
  EigenResidual<Scalar> out;
  out.r = apply_rotation(b.hh_vectors, (y - belief_mean(b)).eval(), true);
  out.z = out.r.array() / b.lambdas.array().max(Scalar(kLambdaMin));
  return out;
}

/// Negative log-density in the eigenframe, including the (d/2) log 2 pi constant.
template <typename Scalar, typename Derived>
Scalar nll(const GaussianBelief<Scalar>& b, const Eigen::MatrixBase<Derived>& y) {
  using std::log;
  const auto res = whiten(b, y);
  const auto lam = b.lambdas.array().max(Scalar(kLambdaMin));
  const Scalar quad = res.z.squaredNorm();
  const Scalar logdet = Scalar(2) * lam.log().sum();
  return Scalar(0.5) * (logdet + quad) +
         Scalar(0.5 * static_cast<double>(b.dim()) * std::log(2.0 * std::numbers::pi));
}

/// S draws as the columns of a d x S matrix.
template <typename Scalar>
typename GaussianBelief<Scalar>::Matrix sample(const GaussianBelief<Scalar>& b, Rng& rng,
                                               Eigen::Index draws) {
  const auto d = b.dim();
  typename GaussianBelief<Scalar>::Matrix y(d, draws);
  for (Eigen::Index s = 0; s < draws; ++s)
    for (Eigen::Index i = 0; i < d; ++i) y(i, s) = Scalar(rng.normal());
  y.colwise() += b.t_y;
  apply_rotation_inplace(b.hh_vectors, y, true);
  y = b.lambdas.asDiagonal() * y;
  apply_rotation_inplace(b.hh_vectors, y, false);
  if (b.location.size() != 0) y.colwise() += b.location;
  return y;
}

/// Squared 2-Wasserstein distance to the isotropic law N(target_mean, target_variance I).
/// The covariances commute, so W2^2 = |mu - m|^2 + sum_i (lambda_i - sigma)^2.
template <typename Scalar, typename Derived>
Scalar wasserstein2_squared(const GaussianBelief<Scalar>& b,
                            const Eigen::MatrixBase<Derived>& target_mean, double target_variance) {
  if (!(target_variance >= 0.0)) throw DomainError("target variance must be nonnegative");
  if (target_mean.size() != b.dim()) throw DimensionError("target mean length mismatch");
  const Scalar sigma = Scalar(std::sqrt(target_variance));
  return (belief_mean(b) - target_mean).squaredNorm() +
         (b.lambdas.array() - sigma).square().sum();
}

}  // namespace dynbench
