#include "dynbench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <tuple>

namespace dynbench {

namespace {

constexpr const char* kDash = "—";

std::string num(std::optional<double> x, const char* f = "%.4f") {
  if (!x) return kDash;
  char buf[64];
  std::snprintf(buf, sizeof buf, f, *x);
  return buf;
}

std::string sigma_str(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", s);
  return buf;
}

struct Row {
  std::optional<double> value, lo, hi;
};

Row metric(const CalibrationBlock& b, const std::string& name) {
  auto wilson = [](double rate, std::size_t n) {
    const auto ci = stats::wilson_interval(rate, n, 0.95);
    return Row{rate, ci.lo, ci.hi};
  };
  if (name == "cov50") return wilson(b.coverage_50, b.points);
  if (name == "cov90") return wilson(b.coverage_90, b.points);
  if (name == "sw_pass_rate") return b.sw ? wilson(b.sw->rate, b.sw->tested) : Row{};
  if (name == "mahalanobis_ks_p") return b.mahalanobis_ks ? Row{b.mahalanobis_ks->p_value, {}, {}} : Row{};
  if (name == "mahalanobis_mean_over_dim") return Row{b.mahalanobis_mean_over_dim, {}, {}};
  if (name == "pit_ks_p") return b.pit_ks ? Row{b.pit_ks->p_value, {}, {}} : Row{};
  if (name == "crps") return Row{b.crps, {}, {}};
  if (name == "mse") return Row{b.mse, {}, {}};
  if (name == "stamp_pass")
    return b.stamp == Stamp::NotApplicable ? Row{} : Row{b.stamp == Stamp::Pass ? 1.0 : 0.0, {}, {}};
  throw ConfigError("unknown report metric '" + name + "'");
}

std::vector<const CalibrationBlock*> sorted(const std::vector<CalibrationBlock>& blocks) {
  std::vector<const CalibrationBlock*> out;
  for (const auto& b : blocks) out.push_back(&b);
  std::stable_sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
    return std::tie(a->scenario, a->model, a->horizon, a->sigma) <
           std::tie(b->scenario, b->model, b->horizon, b->sigma);
  });
  return out;
}

}  // namespace

const std::vector<std::string>& report_metrics() {
  static const std::vector<std::string> m = {"cov50", "cov90", "sw_pass_rate", "mahalanobis_ks_p",
                                             "mahalanobis_mean_over_dim", "pit_ks_p", "crps", "mse",
                                             "stamp_pass"};
  return m;
}

void write_report_csv(const std::vector<CalibrationBlock>& blocks, std::ostream& out,
                      const std::vector<std::string>& metrics) {
  const auto& names = metrics.empty() ? report_metrics() : metrics;
  out << "scenario,sigma,metric,value,ci_lo,ci_hi\n";
  for (const auto* b : sorted(blocks))
    for (const auto& name : names) {
      const Row r = metric(*b, name);
      out << b->scenario << ',' << sigma_str(b->sigma) << ',' << name << ',' << num(r.value, "%.6f") << ','
          << num(r.lo, "%.6f") << ',' << num(r.hi, "%.6f") << '\n';
    }
}

void write_report_markdown(const std::vector<CalibrationBlock>& blocks, std::ostream& out) {
  std::map<std::tuple<std::string, std::string, int>, std::vector<CalibrationBlock>> groups;
  for (const auto* b : sorted(blocks)) groups[{b->scenario, b->model, b->horizon}].push_back(*b);

  out << "# Calibration report\n";
  for (const auto& [key, group] : groups) {
    const auto& [scenario, model, horizon] = key;
    out << "\n## " << scenario << " / " << model << " / H=" << horizon << "\n\n";
    out << "| sigma | cov50 | cov90 | SW pass (q=0.05) | Mahalanobis KS p | PIT KS p | CRPS | MSE | "
           "windows | stamp |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& b : group) {
      out << "| " << sigma_str(b.sigma) << " | " << num(b.coverage_50, "%.3f") << " | "
          << num(b.coverage_90, "%.3f") << " | "
          << (b.sw ? num(b.sw->rate, "%.3f") : kDash) << " | "
          << (b.mahalanobis_ks ? num(b.mahalanobis_ks->p_value, "%.3g") : kDash) << " | "
          << (b.pit_ks ? num(b.pit_ks->p_value, "%.3g") : kDash) << " | " << num(b.crps) << " | "
          << num(b.mse) << " | " << b.windows_evaluated << "/" << b.windows_total << " | "
          << to_string(b.stamp) << " |\n";
    }
    out << "\n" << resolution_line(group) << "\n";
    for (const auto& b : group) {
      if (!b.pit_histogram.empty()) {
        out << "\nPIT histogram, sigma " << sigma_str(b.sigma) << ":";
        for (auto c : b.pit_histogram) out << ' ' << c;
        out << "\n";
      }
      for (const auto& n : b.notes) out << "\nNote (sigma " << sigma_str(b.sigma) << "): " << n << "\n";
    }
  }
  out << "\nStamp policy: PASS when coverage is within 3 binomial standard errors of 0.5 and 0.9, "
         "the Mahalanobis KS p-value exceeds 0.01 and the SW pass rate is at least 0.90.\n";
}

}  // namespace dynbench
