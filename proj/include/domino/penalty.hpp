#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "domino/core.hpp"

namespace domino {

inline constexpr double kDefaultPenaltyScale = 3.0;
inline constexpr double kDefaultWithinGroupPenalty = 1.0;

struct ConfusionMatrix {
  // counts(i, j): pixels of true class i predicted as j. Stored as doubles
  // holding exact integers.
  DenseMatrix counts;
  // Row-normalized counts; rows without support are identity rows.
  DenseMatrix normalized;

  std::size_t num_classes() const noexcept { return counts.rows(); }

  // Rebuilds `normalized` from a counts matrix (e.g. one read from CSV).
  static ConfusionMatrix from_counts(DenseMatrix counts);
};

/// The regularizer's W: square, zero diagonal, off-diagonals in [0, scale].
class PenaltyMatrix {
 public:
  PenaltyMatrix() = default;
  PenaltyMatrix(DenseMatrix w, double scale);

  // All-zero N x N matrix (no regularization).
  static PenaltyMatrix zeros(std::size_t n);
  // Validates a matrix read from disk; scale becomes its largest entry.
  static PenaltyMatrix from_matrix(DenseMatrix w);

  std::size_t size() const noexcept { return w_.rows(); }
  double scale() const noexcept { return scale_; }
  double operator()(std::size_t i, std::size_t j) const { return w_(i, j); }
  std::span<const double> row(std::size_t i) const { return w_.row(i); }
  const DenseMatrix& matrix() const noexcept { return w_; }
  double max_off_diagonal() const;

 private:
  DenseMatrix w_;
  double scale_ = 0.0;
};

struct HierarchyGroup {
  std::string name;
  std::vector<std::size_t> members;
};

/// Named class groups. Every class belongs to one or two groups.
class HierarchySpec {
 public:
  HierarchySpec() = default;
  HierarchySpec(std::vector<HierarchyGroup> groups, std::size_t num_classes);

  std::size_t num_classes() const noexcept { return n_; }
  const std::vector<HierarchyGroup>& groups() const noexcept { return groups_; }
  bool share_group(std::size_t i, std::size_t j) const;

  // One singleton group per class.
  static HierarchySpec singletons(std::size_t n);

 private:
  std::vector<HierarchyGroup> groups_;
  std::size_t n_ = 0;
  std::vector<std::vector<bool>> shared_;
};

ConfusionMatrix confusion_from_predictions(std::span<const LabelMap> truth,
                                           std::span<const LabelMap> pred);

/// w(i,j) = scale * (1 - normalized(i,j)) off the diagonal, zero on it.
PenaltyMatrix build_cm_penalty(const ConfusionMatrix& c,
                               double scale = kDefaultPenaltyScale);

/// p_within for class pairs that share a group, s_max otherwise.
PenaltyMatrix build_hc_penalty(const HierarchySpec& h,
                               double s_max = kDefaultPenaltyScale,
                               double p_within = kDefaultWithinGroupPenalty);

// Format chosen by extension: ".csv" is CSV, anything else DOM1.
void save_penalty(const std::filesystem::path& path, const PenaltyMatrix& w);
PenaltyMatrix load_penalty(const std::filesystem::path& path);

}  // namespace domino
