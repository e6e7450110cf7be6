#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dynbench/belief.hpp"

namespace dynbench::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::optional<double> reject_at;

  bool rejected(double alpha) const { return p_value <= alpha; }
};

// Special functions -----------------------------------------------------------

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse standard normal CDF (Wichura AS 241), |rel. error| ~ 1e-16.
double normal_quantile(double p);
/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
double chi2_cdf(double x, double dof);
double chi2_sf(double x, double dof);
/// P(K > lambda) for the limiting Kolmogorov distribution.
double kolmogorov_sf(double lambda);

// Tests -----------------------------------------------------------------------

/// One-sample Kolmogorov-Smirnov test against a continuous CDF. The p-value
/// uses the asymptotic law at the effective size (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
TestResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf);
TestResult ks_uniform(std::span<const double> u);

/// Shapiro-Wilk W and its p-value (Royston 1995 normalizing transform), 3 <= n <= 5000.
/// Throws DomainError for a constant sample.
TestResult shapiro_wilk(std::span<const double> sample);

/// Benjamini-Hochberg step-up at level q; the mask is in input order.
std::vector<bool> bh_fdr(std::span<const double> p_values, double q);

/// Pearson chi-square goodness of fit of counts to equal expected frequencies.
TestResult chi2_uniform_gof(std::span<const std::size_t> counts);

// Forecast scoring ------------------------------------------------------------

/// Probability integral transform Phi((y - mu) / sigma).
double pit(double mu, double sigma, double y);
std::vector<std::size_t> pit_histogram(std::span<const double> u, int bins = 20);

/// Half-width multiplier of the central interval with the given nominal level.
double central_z(double nominal);

/// Fraction of (mean, std, y) triples with y inside the nominal central interval.
double coverage(const Eigen::Ref<const Eigen::ArrayXd>& mean, const Eigen::Ref<const Eigen::ArrayXd>& std,
                const Eigen::Ref<const Eigen::ArrayXd>& y, double nominal);
/// Coverage pooled over (belief, dimension) pairs using marginal Gaussian intervals.
double coverage(std::span<const Belief> beliefs, std::span<const Eigen::VectorXd> targets,
                double nominal);
/// Coverage from an ensemble: per dimension, the empirical quantiles of the
/// samples (columns) at (1 -/+ nominal) / 2.
double ensemble_coverage(std::span<const Eigen::MatrixXd> samples,
                         std::span<const Eigen::VectorXd> targets, double nominal);

double crps_gaussian(double mu, double sigma, double y);
double crps_ensemble(std::span<const double> samples, double y);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
/// Wilson score interval for a binomial proportion.
Interval wilson_interval(double rate, std::size_t n, double confidence = 0.95);

// Mahalanobis and shape suite -------------------------------------------------

struct MahalanobisResult {
  TestResult ks;
  double mean = 0.0;
  double mean_over_dim = 0.0;
  std::vector<double> distances;
};

/// m_t = |Lambda^-1 U^T (y_t - c_t)|^2 with c_t the predictive mean
/// (use_mean_residual) or one draw from the belief (needs rng). The KS test
/// compares chi2_{d_t}(m_t) to Unif(0,1), i.e. m_t against chi2_{d_t}.
MahalanobisResult mahalanobis_suite(std::span<const Belief> beliefs,
                                    std::span<const Eigen::VectorXd> targets,
                                    bool use_mean_residual, Rng* rng = nullptr);

struct PassRate {
  double rate = 0.0;
  std::size_t tested = 0;
  /// Dimensions with fewer than 3 observations or a constant sample.
  std::size_t skipped = 0;
};

/// Fraction of dimensions whose Shapiro-Wilk null survives BH-FDR at level q.
PassRate sw_pass_rate(const std::vector<std::vector<double>>& samples_by_dim, double q);

}  // namespace dynbench::stats
