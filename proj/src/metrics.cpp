#include "domino/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>

namespace domino {

namespace {

void check_pair(int w, int h, std::size_t n, const LabelMap& t) {
  if (t.width() != w || t.height() != h) {
    fail(ErrorKind::Shape, "prediction and truth differ in dimensions");
  }
  if (t.num_classes() != n) fail(ErrorKind::Shape, "prediction and truth differ in class count");
}

std::int64_t dist2(const Pixel& a, const Pixel& b) {
  const std::int64_t dx = a.x - b.x;
  const std::int64_t dy = a.y - b.y;
  return dx * dx + dy * dy;
}

void require_points(std::span<const Pixel> a, std::span<const Pixel> b) {
  if (a.empty() || b.empty()) {
    fail(ErrorKind::Argument, "Hausdorff distance is undefined for an empty point set");
  }
}

// max over a of min over b, on squared distances. Stops scanning b once a
// point is known not to raise the running maximum.
std::int64_t directed_max_min2(std::span<const Pixel> a, std::span<const Pixel> b) {
  std::int64_t worst = 0;
  for (const auto& p : a) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (const auto& q : b) {
      best = std::min(best, dist2(p, q));
      if (best <= worst) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

double directed_mean_min(std::span<const Pixel> a, std::span<const Pixel> b) {
  double sum = 0.0;
  for (const auto& p : a) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (const auto& q : b) {
      best = std::min(best, dist2(p, q));
      if (best == 0) break;
    }
    sum += std::sqrt(static_cast<double>(best));
  }
  return sum / static_cast<double>(a.size());
}

std::size_t top_n_hits(const ProbMap& p, const LabelMap& t, std::size_t n) {
  check_pair(p.width(), p.height(), p.num_classes(), t);
  if (n < 1 || n > p.num_classes()) {
    fail(ErrorKind::Argument, "top-n requires 1 <= n <= class count, got " + std::to_string(n));
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < p.num_pixels(); ++i) {
    auto px = p.pixel(i);
    const std::size_t c = t[i];
    std::size_t rank = 0;
    for (std::size_t j = 0; j < px.size(); ++j) {
      if (px[j] > px[c] || (j < c && px[j] == px[c])) ++rank;
    }
    hits += rank < n;
  }
  return hits;
}

std::size_t bin_of(double p, std::size_t bins) {
  return std::min(static_cast<std::size_t>(p * static_cast<double>(bins)), bins - 1);
}

GranularityReport report_for(std::span<const ProbMap> preds, std::span<const LabelMap> truths,
                             const std::vector<std::string>& names, std::string granularity,
                             const EvalOptions& options) {
  const std::size_t n = names.size();
  GranularityReport r;
  r.granularity = std::move(granularity);
  for (const auto& t : truths) r.pixels += t.size();

  const std::size_t max_n = std::min(options.max_top_n, n);
  for (std::size_t k = 1; k <= max_n; ++k) {
    std::size_t hits = 0;
    for (std::size_t s = 0; s < preds.size(); ++s) hits += top_n_hits(preds[s], truths[s], k);
    r.top_n.push_back(static_cast<double>(hits) / static_cast<double>(r.pixels));
  }

  std::vector<LabelMap> hard;
  hard.reserve(preds.size());
  for (const auto& p : preds) hard.push_back(argmax_map(p));

  double ece_sum = 0.0, dice_sum = 0.0;
  std::size_t supported = 0;
  for (std::size_t c = 0; c < n; ++c) {
    ClassMetrics m;
    m.name = names[c];
    double dice_total = 0.0;
    double hd_total = 0.0, mhd_total = 0.0;
    std::size_t hd_count = 0;
    for (std::size_t s = 0; s < truths.size(); ++s) {
      const auto truth_mask = binary_mask(truths[s], c);
      const auto pred_mask = binary_mask(hard[s], c);
      m.support += truth_mask.size();
      dice_total += dice(truths[s], hard[s], c);
      if (truth_mask.empty() || pred_mask.empty()) {
        ++m.hausdorff_undefined;
      } else {
        hd_total += hausdorff(truth_mask, pred_mask);
        mhd_total += modified_hausdorff(truth_mask, pred_mask);
        ++hd_count;
      }
    }
    m.dice = dice_total / static_cast<double>(truths.size());
    if (hd_count > 0) {
      m.hausdorff = hd_total / static_cast<double>(hd_count);
      m.modified_hausdorff = mhd_total / static_cast<double>(hd_count);
    }
    m.reliability = reliability_curve(preds, truths, c, options.bins);
    m.ece = expected_calibration_error(m.reliability);
    if (m.support > 0) {
      ece_sum += m.ece;
      dice_sum += m.dice;
      ++supported;
    }
    r.classes.push_back(std::move(m));
  }
  if (supported > 0) {
    r.mean_ece = ece_sum / static_cast<double>(supported);
    r.mean_dice = dice_sum / static_cast<double>(supported);
  }
  return r;
}

}  // namespace

std::size_t ReliabilityCurve::total() const noexcept {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

GroupMap::GroupMap(std::vector<std::size_t> fine_to_coarse, std::vector<std::string> coarse_names)
    : fine_to_coarse_(std::move(fine_to_coarse)), coarse_names_(std::move(coarse_names)) {
  if (fine_to_coarse_.empty() || coarse_names_.empty()) {
    fail(ErrorKind::Argument, "group map must be non-empty");
  }
  std::vector<bool> used(coarse_names_.size(), false);
  for (auto c : fine_to_coarse_) {
    if (c >= coarse_names_.size()) {
      fail(ErrorKind::Argument, "group map sends a class to coarse index " + std::to_string(c) +
                                    " beyond " + std::to_string(coarse_names_.size()) +
                                    " coarse classes");
    }
    used[c] = true;
  }
  for (std::size_t c = 0; c < used.size(); ++c) {
    if (!used[c]) {
      fail(ErrorKind::Argument, "coarse class '" + coarse_names_[c] + "' has no members");
    }
  }
  std::set<std::string> seen(coarse_names_.begin(), coarse_names_.end());
  if (seen.size() != coarse_names_.size()) {
    fail(ErrorKind::Argument, "coarse class names must be unique");
  }
}

GroupMap GroupMap::identity(const ClassSet& classes) {
  std::vector<std::size_t> map(classes.size());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = i;
  return GroupMap(std::move(map), classes.names());
}

double dice(const LabelMap& truth, const LabelMap& pred, std::size_t cls) {
  check_pair(pred.width(), pred.height(), pred.num_classes(), truth);
  if (cls >= truth.num_classes()) fail(ErrorKind::Index, "class out of range");
  std::size_t a = 0, b = 0, both = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool in_t = truth[i] == cls;
    const bool in_p = pred[i] == cls;
    a += in_t;
    b += in_p;
    both += in_t && in_p;
  }
  if (a + b == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

double hausdorff(std::span<const Pixel> a, std::span<const Pixel> b) {
  require_points(a, b);
  const auto d2 = std::max(directed_max_min2(a, b), directed_max_min2(b, a));
  return std::sqrt(static_cast<double>(d2));
}

double modified_hausdorff(std::span<const Pixel> a, std::span<const Pixel> b) {
  require_points(a, b);
  return std::max(directed_mean_min(a, b), directed_mean_min(b, a));
}

double top_n_accuracy(const ProbMap& p, const LabelMap& t, std::size_t n) {
  return static_cast<double>(top_n_hits(p, t, n)) / static_cast<double>(p.num_pixels());
}

ReliabilityCurve reliability_curve(std::span<const ProbMap> p, std::span<const LabelMap> t,
                                   std::size_t cls, std::size_t bins) {
  if (bins < 2) fail(ErrorKind::Argument, "reliability curves need at least 2 bins");
  if (p.size() != t.size()) fail(ErrorKind::Shape, "prediction and truth counts differ");
  ReliabilityCurve curve;
  curve.cls = cls;
  curve.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    curve.edges[b] = static_cast<double>(b) / static_cast<double>(bins);
  }
  curve.mean_confidence.assign(bins, 0.0);
  curve.observed_frequency.assign(bins, 0.0);
  curve.counts.assign(bins, 0);
  std::vector<double> positives(bins, 0.0);
  for (std::size_t s = 0; s < p.size(); ++s) {
    check_pair(p[s].width(), p[s].height(), p[s].num_classes(), t[s]);
    if (cls >= p[s].num_classes()) {
      fail(ErrorKind::Argument, "class " + std::to_string(cls) + " out of range");
    }
    for (std::size_t i = 0; i < p[s].num_pixels(); ++i) {
      const double conf = p[s].pixel(i)[cls];
      const std::size_t b = bin_of(conf, bins);
      ++curve.counts[b];
      curve.mean_confidence[b] += conf;
      positives[b] += t[s][i] == cls ? 1.0 : 0.0;
    }
  }
  for (std::size_t b = 0; b < bins; ++b) {
    if (curve.counts[b] == 0) continue;
    const auto count = static_cast<double>(curve.counts[b]);
    curve.mean_confidence[b] /= count;
    curve.observed_frequency[b] = positives[b] / count;
  }
  return curve;
}

ReliabilityCurve reliability_curve(const ProbMap& p, const LabelMap& t, std::size_t cls,
                                   std::size_t bins) {
  return reliability_curve(std::span<const ProbMap>(&p, 1), std::span<const LabelMap>(&t, 1),
                           cls, bins);
}

double expected_calibration_error(const ReliabilityCurve& curve) {
  const std::size_t total = curve.total();
  if (total == 0) return 0.0;
  double ece = 0.0;
  for (std::size_t b = 0; b < curve.bins(); ++b) {
    if (curve.counts[b] == 0) continue;
    ece += static_cast<double>(curve.counts[b]) / static_cast<double>(total) *
           std::abs(curve.mean_confidence[b] - curve.observed_frequency[b]);
  }
  return ece;
}

ProbMap merge_prob(const ProbMap& p, const GroupMap& g) {
  if (g.fine_classes() != p.num_classes()) {
    fail(ErrorKind::Argument, "group map covers " + std::to_string(g.fine_classes()) +
                                  " classes but the probability map has " +
                                  std::to_string(p.num_classes()));
  }
  const std::size_t coarse = g.coarse_classes();
  std::vector<double> out(p.num_pixels() * coarse, 0.0);
  for (std::size_t i = 0; i < p.num_pixels(); ++i) {
    auto px = p.pixel(i);
    for (std::size_t c = 0; c < px.size(); ++c) out[i * coarse + g.coarse_of(c)] += px[c];
    // Summation can overshoot 1 by an ulp.
    for (std::size_t k = 0; k < coarse; ++k) {
      out[i * coarse + k] = std::min(out[i * coarse + k], 1.0);
    }
  }
  return ProbMap(p.width(), p.height(), coarse, std::move(out));
}

LabelMap merge_labels(const LabelMap& t, const GroupMap& g) {
  if (g.fine_classes() != t.num_classes()) {
    fail(ErrorKind::Argument, "group map does not cover the label map's classes");
  }
  std::vector<std::uint8_t> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(g.coarse_of(t[i]));
  }
  return LabelMap(t.width(), t.height(), g.coarse_classes(), std::move(out));
}

EvalReport evaluate(std::span<const ProbMap> preds, std::span<const LabelMap> truths,
                    const ClassSet& classes, const GroupMap* group_map,
                    const EvalOptions& options) {
  if (preds.empty()) fail(ErrorKind::Argument, "nothing to evaluate");
  if (preds.size() != truths.size()) {
    fail(ErrorKind::Shape, "prediction and truth counts differ");
  }
  for (std::size_t s = 0; s < preds.size(); ++s) {
    if (preds[s].num_classes() != classes.size()) {
      fail(ErrorKind::Shape, "prediction class count differs from the class set");
    }
    check_pair(preds[s].width(), preds[s].height(), preds[s].num_classes(), truths[s]);
  }
  EvalReport report;
  report.fine = report_for(preds, truths, classes.names(), "fine", options);
  if (group_map != nullptr) {
    std::vector<ProbMap> merged_p;
    std::vector<LabelMap> merged_t;
    for (std::size_t s = 0; s < preds.size(); ++s) {
      merged_p.push_back(merge_prob(preds[s], *group_map));
      merged_t.push_back(merge_labels(truths[s], *group_map));
    }
    report.merged = report_for(merged_p, merged_t, group_map->coarse_names(), "merged", options);
  }
  return report;
}

}  // namespace domino
