#include "dynbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace dynbench::stats {

namespace {

double poly(std::span<const double> c, double x) {
  // c[0] + c[1] x + c[2] x^2 + ...
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -HUGE_VAL;
    if (p == 1.0) return HUGE_VAL;
    throw DomainError("normal_quantile requires p in [0,1]");
  }
  static constexpr double a[] = {3.3871328727963666080e0,  1.3314166789178437745e+2,
                                 1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                 3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[] = {1.0,
                                 4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                 5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                 3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                 5.2264952788528545610e+3};
  static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                 5.76949722146069140550e0, 3.64784832476320460504e0,
                                 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                 2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[] = {1.0,
                                 2.05319162663775882187e0, 1.67638483018380384940e0,
                                 6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                 1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                 1.05075007164441684324e-9};
  static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                 1.78482653991729133580e0, 2.96560571828504891230e-1,
                                 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                 2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {1.0,
                                 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                 1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                 1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                 2.04426310338993978564e-15};
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(a, r) / poly(b, r);
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = poly(c, r) / poly(d, r);
  } else {
    r -= 5.0;
    val = poly(e, r) / poly(f, r);
  }
  return q < 0 ? -val : val;
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("gamma shape must be positive");
  if (x < 0.0) throw DomainError("incomplete gamma argument must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  constexpr double eps = 1e-16;
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * eps) break;
    }
    return std::min(1.0, sum * std::exp(log_prefix));
  }
  // Modified Lentz continued fraction for Q(a, x).
  constexpr double tiny = 1e-300;
  double bq = x + 1.0 - a, cq = 1.0 / tiny, dq = 1.0 / bq, h = dq;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    bq += 2.0;
    dq = an * dq + bq;
    if (std::abs(dq) < tiny) dq = tiny;
    cq = bq + an / cq;
    if (std::abs(cq) < tiny) cq = tiny;
    dq = 1.0 / dq;
    const double delta = dq * cq;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return std::max(0.0, 1.0 - std::exp(log_prefix) * h);
}

double chi2_cdf(double x, double dof) {
  if (!(dof > 0.0)) throw DomainError("chi-square degrees of freedom must be positive");
  if (x < 0.0) throw DomainError("chi2_cdf requires x >= 0");
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_sf(double x, double dof) { return 1.0 - chi2_cdf(x, dof); }

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form converges fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double w = std::log(lambda);
    double sum = 0.0;
    for (int k = 1; k < 50; k += 2) sum += std::exp(-k * k * pi2 / (8.0 * lambda * lambda));
    const double cdf = std::exp(0.5 * std::log(2.0 * std::numbers::pi) - w) * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-18) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw SizingError("KS test needs at least one observation");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  TestResult r;
  r.statistic = d;
  r.n = x.size();
  r.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

TestResult ks_uniform(std::span<const double> u) {
  return ks_test(u, [](double v) { return std::clamp(v, 0.0, 1.0); });
}

TestResult shapiro_wilk(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3) throw SizingError("Shapiro-Wilk needs at least 3 observations");
  if (n > 5000) throw SizingError("Shapiro-Wilk p-value approximation is valid up to n = 5000");

  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (!(range > 1e-19 * std::max(1.0, std::abs(x.front()))))
    throw DomainError("Shapiro-Wilk: degenerate (constant) sample");

  // Royston (1995) approximation of the optimal coefficients.
  static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
  static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
  static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
  static constexpr double g[] = {-2.273, 0.459};

  const double an = static_cast<double>(n);
  const std::size_t half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
  } else {
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      m[i] = normal_quantile((i + 1 - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, rsn) - m[0] / ssumm2;
    std::size_t first;
    double fac;
    if (n > 5) {
      first = 2;
      const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
    } else {
      first = 1;
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
  }

  // W as the squared correlation of the ordered sample with the coefficients.
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / an;
  double ss = 0.0, num = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  for (std::size_t i = 0; i < half; ++i) num += a[i] * (x[n - 1 - i] - x[i]);
  double w = std::min(1.0, num * num / ss);

  TestResult r;
  r.n = n;
  r.statistic = w;
  if (n == 3) {
    constexpr double pi6 = 6.0 / std::numbers::pi;
    const double stqr = std::asin(std::sqrt(0.75));
    r.p_value = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    return r;
  }
  const double w1 = 1.0 - w;
  if (w1 <= 0.0) {
    r.p_value = 1.0;
    return r;
  }
  double y = std::log(w1);
  const double lxx = std::log(an);
  double mu, sigma;
  if (n <= 11) {
    const double gamma = poly(g, an);
    if (y >= gamma) {
      r.p_value = 1e-99;
      return r;
    }
    y = -std::log(gamma - y);
    mu = poly(c3, an);
    sigma = std::exp(poly(c4, an));
  } else {
    mu = poly(c5, lxx);
    sigma = std::exp(poly(c6, lxx));
  }
  r.p_value = std::clamp(1.0 - normal_cdf((y - mu) / sigma), 0.0, 1.0);
  return r;
}

std::vector<bool> bh_fdr(std::span<const double> p_values, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("FDR level q must lie in (0,1)");
  const std::size_t m = p_values.size();
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p-values must lie in [0,1]");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });
  std::size_t k = 0;
  for (std::size_t rank = m; rank >= 1; --rank) {
    if (p_values[order[rank - 1]] <= static_cast<double>(rank) * q / static_cast<double>(m)) {
      k = rank;
      break;
    }
  }
  std::vector<bool> reject(m, false);
  for (std::size_t i = 0; i < k; ++i) reject[order[i]] = true;
  return reject;
}

TestResult chi2_uniform_gof(std::span<const std::size_t> counts) {
  if (counts.size() < 2) throw SizingError("chi-square GOF needs at least two cells");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) stat += (c - expected) * (c - expected) / expected;
  TestResult r;
  r.statistic = stat;
  r.n = static_cast<std::size_t>(total);
  r.p_value = chi2_sf(stat, static_cast<double>(counts.size() - 1));
  return r;
}

double pit(double mu, double sigma, double y) {
  if (!(sigma > 0.0)) throw DomainError("PIT requires a positive predictive std");
  return normal_cdf((y - mu) / sigma);
}

std::vector<std::size_t> pit_histogram(std::span<const double> u, int bins) {
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : u) {
    auto b = static_cast<long>(std::floor(v * bins));
    b = std::clamp(b, 0L, static_cast<long>(bins - 1));
    ++counts[static_cast<std::size_t>(b)];
  }
  return counts;
}

double central_z(double nominal) {
  if (!(nominal > 0.0 && nominal < 1.0)) throw DomainError("nominal level must lie in (0,1)");
  return normal_quantile(0.5 + 0.5 * nominal);
}

double coverage(const Eigen::Ref<const Eigen::ArrayXd>& mean, const Eigen::Ref<const Eigen::ArrayXd>& std,
                const Eigen::Ref<const Eigen::ArrayXd>& y, double nominal) {
  if (mean.size() != std.size() || mean.size() != y.size())
    throw DimensionError("coverage inputs differ in length");
  if (mean.size() == 0) return 0.0;
  const double z = central_z(nominal);
  const auto inside = ((y - mean).abs() <= z * std).cast<double>();
  return inside.mean();
}

double coverage(std::span<const Belief> beliefs, std::span<const Eigen::VectorXd> targets,
                double nominal) {
  if (beliefs.size() != targets.size()) throw DimensionError("one target per belief required");
  const double z = central_z(nominal);
  double inside = 0.0, total = 0.0;
  for (std::size_t t = 0; t < beliefs.size(); ++t) {
    const Eigen::ArrayXd mu = belief_mean(beliefs[t]).array();
    const Eigen::ArrayXd sd = marginal_std(beliefs[t]).array();
    inside += ((targets[t].array() - mu).abs() <= z * sd).cast<double>().sum();
    total += static_cast<double>(mu.size());
  }
  return total > 0 ? inside / total : 0.0;
}

namespace {

double empirical_quantile(std::vector<double>& v, double p) {
  // Linear interpolation between order statistics (type 7).
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

double ensemble_coverage(std::span<const Eigen::MatrixXd> samples,
                         std::span<const Eigen::VectorXd> targets, double nominal) {
  if (samples.size() != targets.size()) throw DimensionError("one target per ensemble required");
  if (!(nominal > 0.0 && nominal < 1.0)) throw DomainError("nominal level must lie in (0,1)");
  double inside = 0.0, total = 0.0;
  std::vector<double> row;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    const auto& s = samples[t];
    if (s.rows() != targets[t].size()) throw DimensionError("ensemble dimension mismatch");
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      row.resize(static_cast<std::size_t>(s.cols()));
      for (Eigen::Index k = 0; k < s.cols(); ++k) row[static_cast<std::size_t>(k)] = s(i, k);
      const double lo = empirical_quantile(row, 0.5 - 0.5 * nominal);
      const double hi = empirical_quantile(row, 0.5 + 0.5 * nominal);
      inside += (targets[t](i) >= lo && targets[t](i) <= hi) ? 1.0 : 0.0;
      total += 1.0;
    }
  }
  return total > 0 ? inside / total : 0.0;
}

double crps_gaussian(double mu, double sigma, double y) {
  if (sigma < 0.0) throw DomainError("CRPS requires sigma >= 0");
  if (sigma == 0.0) return std::abs(y - mu);
  const double z = (y - mu) / sigma;
  return sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) -
                  1.0 / std::sqrt(std::numbers::pi));
}

double crps_ensemble(std::span<const double> samples, double y) {
  if (samples.empty()) throw SizingError("CRPS needs a non-empty ensemble");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double m = static_cast<double>(x.size());
  double abs_err = 0.0, spread = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    abs_err += std::abs(x[i] - y);
    spread += (2.0 * static_cast<double>(i) - m + 1.0) * x[i];
  }
  // sum_{i,j} |x_i - x_j| = 2 sum_i (2i - m + 1) x_(i)
  return abs_err / m - spread / (m * m);
}

Interval wilson_interval(double rate, std::size_t n, double confidence) {
  if (n == 0) return {0.0, 1.0};
  const double z = central_z(confidence);
  const double nn = static_cast<double>(n);
  const double denom = 1.0 + z * z / nn;
  const double center = (rate + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(rate * (1.0 - rate) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

MahalanobisResult mahalanobis_suite(std::span<const Belief> beliefs,
                                    std::span<const Eigen::VectorXd> targets,
                                    bool use_mean_residual, Rng* rng) {
  if (beliefs.size() != targets.size()) throw DimensionError("one target per belief required");
  if (beliefs.empty()) throw SizingError("Mahalanobis suite needs at least one window");
  if (!use_mean_residual && rng == nullptr)
    throw ConfigError("sample residuals need a random generator");
  MahalanobisResult out;
  out.distances.reserve(beliefs.size());
  std::vector<double> u;
  u.reserve(beliefs.size());
  double dim_total = 0.0;
  for (std::size_t t = 0; t < beliefs.size(); ++t) {
    const Belief& b = beliefs[t];
    double m;
    if (use_mean_residual) {
      m = whiten(b, targets[t]).mahalanobis();
    } else {
      // Residual against one draw: y - y_hat = (y - mu) - (y_hat - mu).
      const Eigen::VectorXd draw = sample(b, *rng, 1).col(0);
      const Eigen::VectorXd shifted = targets[t] - draw + belief_mean(b);
      m = whiten(b, shifted).mahalanobis();
    }
    out.distances.push_back(m);
    const double d = static_cast<double>(b.dim());
    u.push_back(chi2_cdf(m, d));
    dim_total += d;
  }
  out.ks = ks_uniform(u);
  out.mean = std::accumulate(out.distances.begin(), out.distances.end(), 0.0) /
             static_cast<double>(out.distances.size());
  out.mean_over_dim = out.mean / (dim_total / static_cast<double>(beliefs.size()));
  return out;
}

PassRate sw_pass_rate(const std::vector<std::vector<double>>& samples_by_dim, double q) {
  PassRate out;
  std::vector<double> p;
  for (const auto& s : samples_by_dim) {
    if (s.size() < 3 || s.size() > 5000) {
      ++out.skipped;
      continue;
    }
    try {
      p.push_back(shapiro_wilk(s).p_value);
    } catch (const DomainError&) {
      ++out.skipped;
    }
  }
  out.tested = p.size();
  if (p.empty()) return out;
  const auto reject = bh_fdr(p, q);
  const auto kept = std::count(reject.begin(), reject.end(), false);
  out.rate = static_cast<double>(kept) / static_cast<double>(p.size());
  return out;
}

}  // namespace dynbench::stats
