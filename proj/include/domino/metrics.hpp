#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "domino/core.hpp"

namespace domino {

struct ReliabilityCurve {
  std::size_t cls = 0;
  std::vector<double> edges;            // bins + 1 equal-width edges over [0,1]
  std::vector<double> mean_confidence;  // 0 for empty bins
  std::vector<double> observed_frequency;
  std::vector<std::size_t> counts;

  std::size_t bins() const noexcept { return counts.size(); }
  std::size_t total() const noexcept;
  double bin_center(std::size_t b) const { return 0.5 * (edges[b] + edges[b + 1]); }
};

/// Total map from fine classes onto contiguous coarse classes.
class GroupMap {
 public:
  GroupMap() = default;
  GroupMap(std::vector<std::size_t> fine_to_coarse, std::vector<std::string> coarse_names);

  static GroupMap identity(const ClassSet& classes);

  std::size_t fine_classes() const noexcept { return fine_to_coarse_.size(); }
  std::size_t coarse_classes() const noexcept { return coarse_names_.size(); }
  std::size_t coarse_of(std::size_t fine) const { return fine_to_coarse_.at(fine); }
  const std::vector<std::string>& coarse_names() const noexcept { return coarse_names_; }
  const std::vector<std::size_t>& mapping() const noexcept { return fine_to_coarse_; }

 private:
  std::vector<std::size_t> fine_to_coarse_;
  std::vector<std::string> coarse_names_;
};

/// 2|Y n Yhat| / (|Y| + |Yhat|) for one class; 1 when both masks are empty.
double dice(const LabelMap& truth, const LabelMap& pred, std::size_t cls);

/// Symmetric max of directed max-min Euclidean distances. Throws Argument
/// when either set is empty.
double hausdorff(std::span<const Pixel> a, std::span<const Pixel> b);
/// Symmetric max of directed mean-of-min distances.
double modified_hausdorff(std::span<const Pixel> a, std::span<const Pixel> b);

/// Fraction of pixels whose true class ranks among the n largest
/// probabilities (ties broken toward the lower index).
double top_n_accuracy(const ProbMap& p, const LabelMap& t, std::size_t n);

ReliabilityCurve reliability_curve(const ProbMap& p, const LabelMap& t, std::size_t cls,
                                   std::size_t bins = 10);
/// Pools several maps into one curve.
ReliabilityCurve reliability_curve(std::span<const ProbMap> p, std::span<const LabelMap> t,
                                   std::size_t cls, std::size_t bins = 10);
double expected_calibration_error(const ReliabilityCurve& curve);

ProbMap merge_prob(const ProbMap& p, const GroupMap& g);
LabelMap merge_labels(const LabelMap& t, const GroupMap& g);

struct EvalOptions {
  std::size_t bins = 10;
  std::size_t max_top_n = 3;
};

struct ClassMetrics {
  std::string name;
  std::size_t support = 0;  // truth pixels over all samples
  double dice = 0.0;        // mean over samples
  // Mean over samples where both masks are non-empty; nullopt when none are.
  std::optional<double> hausdorff;
  std::optional<double> modified_hausdorff;
  std::size_t hausdorff_undefined = 0;  // samples skipped for an empty mask
  ReliabilityCurve reliability;
  double ece = 0.0;
};

struct GranularityReport {
  std::string granularity;  // "fine" or "merged"
  std::vector<ClassMetrics> classes;
  std::vector<double> top_n;  // top_n[k] is Top-(k+1)
  double mean_ece = 0.0;      // over classes with support
  double mean_dice = 0.0;     // over classes with support
  std::size_t pixels = 0;
};

struct EvalReport {
  GranularityReport fine;
  std::optional<GranularityReport> merged;
  std::vector<std::string> warnings;
};

EvalReport evaluate(std::span<const ProbMap> preds, std::span<const LabelMap> truths,
                    const ClassSet& classes, const GroupMap* group_map = nullptr,
                    const EvalOptions& options = {});

}  // namespace domino
