#include "domino/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "domino/dom1.hpp"

namespace domino {

namespace {

using nlohmann::json;

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json granularity_json(const GranularityReport& g) {
  json classes = json::array();
  for (const auto& c : g.classes) {
    classes.push_back({
        {"class", c.name},
        {"support", c.support},
        {"dice", c.dice},
        {"hausdorff", optional_number(c.hausdorff)},
        {"modified_hausdorff", optional_number(c.modified_hausdorff)},
        {"hausdorff_undefined_samples", c.hausdorff_undefined},
        {"ece", c.ece},
    });
  }
  json top_n = json::object();
  for (std::size_t k = 0; k < g.top_n.size(); ++k) {
    top_n["top" + std::to_string(k + 1)] = g.top_n[k];
  }
  return {
      {"granularity", g.granularity},
      {"num_classes", g.classes.size()},
      {"pixels", g.pixels},
      {"top_n", top_n},
      {"mean_ece", g.mean_ece},
      {"mean_dice", g.mean_dice},
      {"classes", classes},
  };
}

std::string metrics_csv(const GranularityReport& g) {
  std::ostringstream out;
  out << "class,support,dice,hausdorff,modified_hausdorff,ece\n";
  for (const auto& c : g.classes) {
    out << c.name << ',' << c.support << ',' << csv::format_double(c.dice) << ','
        << (c.hausdorff ? csv::format_double(*c.hausdorff) : "undefined") << ','
        << (c.modified_hausdorff ? csv::format_double(*c.modified_hausdorff) : "undefined")
        << ',' << csv::format_double(c.ece) << '\n';
  }
  return out.str();
}

std::string topn_csv(const GranularityReport& g) {
  std::ostringstream out;
  out << "n,accuracy\n";
  for (std::size_t k = 0; k < g.top_n.size(); ++k) {
    out << k + 1 << ',' << csv::format_double(g.top_n[k]) << '\n';
  }
  return out.str();
}

// Class names become file name fragments.
std::string file_safe(const std::string& name) {
  std::string out;
  for (char ch : name) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '-' || ch == '_';
    out.push_back(ok ? ch : '_');
  }
  return out;
}

void write_granularity(const std::filesystem::path& dir, const GranularityReport& g) {
  write_file_atomic(dir / ("metrics_" + g.granularity + ".csv"), metrics_csv(g));
  write_file_atomic(dir / ("topn_" + g.granularity + ".csv"), topn_csv(g));
  for (const auto& c : g.classes) {
    // The title is the file stem so re-rendering the CSV reproduces the SVG.
    const std::string title = g.granularity + "_" + file_safe(c.name);
    const std::string stem = "reliability_" + title;
    write_file_atomic(dir / (stem + ".csv"), reliability_csv(c.reliability));
    write_file_atomic(dir / (stem + ".svg"), reliability_svg(c.reliability, title));
  }
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

}  // namespace

std::string report_json(const EvalReport& report) {
  json j;
  j["format"] = "domino-eval-report";
  j["version"] = 1;
  j["dice_convention"] = "both masks empty -> 1, one empty -> 0";
  j["hausdorff_convention"] =
      "hausdorff: max of directed max-min distances; modified_hausdorff: max of directed "
      "mean-min distances; null when a mask is empty in every sample";
  j["warnings"] = report.warnings;
  j["granularities"] = json::array();
  j["granularities"].push_back(granularity_json(report.fine));
  if (report.merged) j["granularities"].push_back(granularity_json(*report.merged));
  return j.dump(2) + "\n";
}

std::string reliability_csv(const ReliabilityCurve& curve) {
  std::ostringstream out;
  out << "bin_center,mean_confidence,observed_frequency,count\n";
  for (std::size_t b = 0; b < curve.bins(); ++b) {
    out << csv::format_double(curve.bin_center(b)) << ','
        << csv::format_double(curve.mean_confidence[b]) << ','
        << csv::format_double(curve.observed_frequency[b]) << ',' << curve.counts[b] << '\n';
  }
  return out.str();
}

ReliabilityCurve parse_reliability_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("bin_center,mean_confidence,observed_frequency,count", 0) != 0) {
    fail(ErrorKind::Parse, "reliability CSV line 1: missing header");
  }
  ReliabilityCurve curve;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double center = 0, conf = 0, freq = 0;
    unsigned long long count = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%llu%c", &center, &conf, &freq, &count, &tail) != 4) {
      fail(ErrorKind::Parse, "reliability CSV line " + std::to_string(line_no) + ": malformed row");
    }
    curve.mean_confidence.push_back(conf);
    curve.observed_frequency.push_back(freq);
    curve.counts.push_back(count);
  }
  const std::size_t bins = curve.counts.size();
  if (bins < 2) fail(ErrorKind::Parse, "reliability CSV needs at least 2 bins");
  for (std::size_t b = 0; b <= bins; ++b) {
    curve.edges.push_back(static_cast<double>(b) / static_cast<double>(bins));
  }
  return curve;
}

std::string reliability_svg(const ReliabilityCurve& curve, const std::string& title) {
  constexpr double kSize = 360.0;
  constexpr double kLeft = 60.0;
  constexpr double kTop = 40.0;
  auto px = [&](double v) { return fixed(kLeft + v * kSize, 2); };
  auto py = [&](double v) { return fixed(kTop + (1.0 - v) * kSize, 2); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"460\" height=\"460\" "
         "viewBox=\"0 0 460 460\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"460\" height=\"460\" fill=\"white\"/>\n";
  svg << "<text x=\"230\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  svg << "<rect x=\"" << px(0) << "\" y=\"" << py(1) << "\" width=\"" << fixed(kSize, 2)
      << "\" height=\"" << fixed(kSize, 2) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = t / 5.0;
    svg << "<text x=\"" << px(v) << "\" y=\"" << fixed(kTop + kSize + 16, 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << fixed(v, 1)
        << "</text>\n";
    svg << "<text x=\"" << fixed(kLeft - 6, 2) << "\" y=\"" << py(v)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fixed(v, 1)
        << "</text>\n";
  }
  svg << "<text x=\"" << px(0.5) << "\" y=\"" << fixed(kTop + kSize + 34, 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
         "mean predicted probability</text>\n";
  svg << "<text x=\"16\" y=\"" << py(0.5) << "\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
      << py(0.5) << ")\">observed frequency</text>\n";
  svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\""
      << py(1) << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";

  std::string points;
  for (std::size_t b = 0; b < curve.bins(); ++b) {
    if (curve.counts[b] == 0) continue;
    if (!points.empty()) points += ' ';
    points += px(curve.mean_confidence[b]) + "," + py(curve.observed_frequency[b]);
  }
  if (!points.empty()) {
    svg << "<polyline points=\"" << points
        << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
    for (std::size_t b = 0; b < curve.bins(); ++b) {
      if (curve.counts[b] == 0) continue;
      svg << "<circle cx=\"" << px(curve.mean_confidence[b]) << "\" cy=\""
          << py(curve.observed_frequency[b]) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }
  }
  svg << "<text x=\"" << fixed(kLeft + 8, 2) << "\" y=\"" << fixed(kTop + 16, 2)
      << "\" font-family=\"sans-serif\" font-size=\"11\">ECE "
      << fixed(expected_calibration_error(curve), 4) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_report(const std::filesystem::path& dir, const EvalReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    fail(ErrorKind::Io, "cannot create output directory " + dir.string());
  }
  write_file_atomic(dir / "report.json", report_json(report));
  write_granularity(dir, report.fine);
  if (report.merged) write_granularity(dir, *report.merged);
}

std::vector<std::filesystem::path> render_reliability_dir(const std::filesystem::path& in_dir,
                                                          const std::filesystem::path& out_dir) {
  if (!std::filesystem::is_directory(in_dir)) {
    fail(ErrorKind::Io, "not a directory: " + in_dir.string());
  }
  std::vector<std::filesystem::path> inputs;
  for (const auto& entry : std::filesystem::directory_iterator(in_dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("reliability_", 0) == 0 &&
        entry.path().extension() == ".csv") {
      inputs.push_back(entry.path());
    }
  }
  std::sort(inputs.begin(), inputs.end());
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::vector<std::filesystem::path> written;
  for (const auto& in : inputs) {
    ReliabilityCurve curve;
    try {
      curve = parse_reliability_csv(read_file(in));
    } catch (const Error& e) {
      fail(e.kind(), in.string() + ": " + e.what());
    }
    auto out = out_dir / in.filename();
    out.replace_extension(".svg");
    // reliability_<granularity>_<class>
    const std::string stem = in.stem().string().substr(std::string("reliability_").size());
    write_file_atomic(out, reliability_svg(curve, stem));
    written.push_back(out);
  }
  return written;
}

std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::ostringstream out;
  out << "iteration,loss\n";
  for (const auto& p : trace) out << p.iteration << ',' << csv::format_double(p.loss) << '\n';
  return out.str();
}

}  // namespace domino
