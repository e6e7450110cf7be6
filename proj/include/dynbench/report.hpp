#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dynbench/evaluate.hpp"

namespace dynbench {

/// Metric names in CSV order. The first three form the coverage / normality
/// grid (cov50, cov90, sw_pass_rate).
const std::vector<std::string>& report_metrics();

/// Rows "scenario,sigma,metric,value,ci_lo,ci_hi", blocks sorted by
/// (scenario, model, horizon, sigma). Missing values and intervals are "—".
/// Restrict to `metrics` when non-empty.
void write_report_csv(const std::vector<CalibrationBlock>& blocks, std::ostream& out,
                      const std::vector<std::string>& metrics = {});

/// Markdown: one coverage / normality table per (scenario, model, horizon),
/// its resolution line, PIT histograms and notes.
void write_report_markdown(const std::vector<CalibrationBlock>& blocks, std::ostream& out);

}  // namespace dynbench
