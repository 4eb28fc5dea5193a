#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "domino/metrics.hpp"
#include "domino/model.hpp"

namespace domino {

// Structured JSON: one record per class per granularity plus Top-N.
std::string report_json(const EvalReport& report);

// CSV with header bin_center,mean_confidence,observed_frequency,count.
std::string reliability_csv(const ReliabilityCurve& curve);
ReliabilityCurve parse_reliability_csv(const std::string& text);

// Self-contained SVG line plot with the diagonal reference.
std::string reliability_svg(const ReliabilityCurve& curve, const std::string& title);

/// Writes report.json, metrics_<g>.csv, topn_<g>.csv and per-class
/// reliability_<g>_<class>.{csv,svg} for each granularity.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

/// Re-renders every reliability_*.csv under `in_dir` to SVG in `out_dir`.
std::vector<std::filesystem::path> render_reliability_dir(const std::filesystem::path& in_dir,
                                                          const std::filesystem::path& out_dir);

std::string trace_csv(const std::vector<TracePoint>& trace);

}  // namespace domino
