#include "domino/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "domino/dom1.hpp"

namespace domino {

ConfusionMatrix ConfusionMatrix::from_counts(DenseMatrix counts) {
  if (counts.rows() != counts.cols() || counts.rows() == 0) {
    fail(ErrorKind::Shape, "confusion counts must be a non-empty square matrix");
  }
  const std::size_t n = counts.rows();
  DenseMatrix normalized(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(counts(i, j) >= 0.0)) {
        fail(ErrorKind::Validation, "negative confusion count at row " +
                                        std::to_string(i));
      }
      total += counts(i, j);
    }
    if (total > 0.0) {
      for (std::size_t j = 0; j < n; ++j) normalized(i, j) = counts(i, j) / total;
    } else {
      normalized(i, i) = 1.0;
    }
  }
  return {std::move(counts), std::move(normalized)};
}

PenaltyMatrix::PenaltyMatrix(DenseMatrix w, double scale)
    : w_(std::move(w)), scale_(scale) {
  if (w_.rows() != w_.cols() || w_.rows() == 0) {
    fail(ErrorKind::Shape, "penalty matrix must be non-empty and square, got " +
                               std::to_string(w_.rows()) + "x" +
                               std::to_string(w_.cols()));
  }
  if (!(scale_ >= 0.0) || !std::isfinite(scale_)) {
    fail(ErrorKind::Argument, "penalty scale must be finite and non-negative");
  }
  for (std::size_t i = 0; i < w_.rows(); ++i) {
    for (std::size_t j = 0; j < w_.cols(); ++j) {
      const double v = w_(i, j);
      if (i == j) {
        if (v != 0.0) {
          fail(ErrorKind::Validation,
               "penalty diagonal entry " + std::to_string(i) + " is not zero");
        }
      } else if (!(v >= 0.0 && v <= scale_)) {
        fail(ErrorKind::Validation, "penalty entry (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") outside [0, scale]");
      }
    }
  }
}

PenaltyMatrix PenaltyMatrix::zeros(std::size_t n) {
  return PenaltyMatrix(DenseMatrix(n, n), 0.0);
}

PenaltyMatrix PenaltyMatrix::from_matrix(DenseMatrix w) {
  double scale = 0.0;
  for (double v : w.data()) {
    if (std::isfinite(v)) scale = std::max(scale, v);
  }
  return PenaltyMatrix(std::move(w), scale);
}

double PenaltyMatrix::max_off_diagonal() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) {
      if (i != j) m = std::max(m, w_(i, j));
    }
  }
  return m;
}

HierarchySpec::HierarchySpec(std::vector<HierarchyGroup> groups, std::size_t num_classes)
    : groups_(std::move(groups)), n_(num_classes) {
  if (n_ < 2) fail(ErrorKind::Config, "hierarchy needs at least 2 classes");
  std::set<std::string> names;
  std::vector<int> membership(n_, 0);
  for (const auto& g : groups_) {
    if (!names.insert(g.name).second) {
      fail(ErrorKind::Config, "duplicate hierarchy group '" + g.name + "'");
    }
    std::set<std::size_t> seen;
    for (auto m : g.members) {
      if (m >= n_) {
        fail(ErrorKind::Config, "group '" + g.name + "' references class " +
                                    std::to_string(m) + " beyond class count");
      }
      if (seen.insert(m).second) ++membership[m];
    }
  }
  for (std::size_t c = 0; c < n_; ++c) {
    if (membership[c] == 0) {
      fail(ErrorKind::Config, "class " + std::to_string(c) + " is in no hierarchy group");
    }
    if (membership[c] > 2) {
      fail(ErrorKind::Config,
           "class " + std::to_string(c) + " is in more than two hierarchy groups");
    }
  }
  shared_.assign(n_, std::vector<bool>(n_, false));
  for (const auto& g : groups_) {
    for (auto a : g.members) {
      for (auto b : g.members) shared_[a][b] = true;
    }
  }
}

bool HierarchySpec::share_group(std::size_t i, std::size_t j) const {
  return shared_.at(i).at(j);
}

HierarchySpec HierarchySpec::singletons(std::size_t n) {
  std::vector<HierarchyGroup> groups;
  for (std::size_t c = 0; c < n; ++c) groups.push_back({"class" + std::to_string(c), {c}});
  return HierarchySpec(std::move(groups), n);
}

ConfusionMatrix confusion_from_predictions(std::span<const LabelMap> truth,
                                           std::span<const LabelMap> pred) {
  if (truth.empty()) fail(ErrorKind::Argument, "confusion needs at least one label map");
  if (truth.size() != pred.size()) {
    fail(ErrorKind::Shape, "truth and prediction sequences differ in length");
  }
  const std::size_t n = truth.front().num_classes();
  std::vector<std::uint64_t> counts(n * n, 0);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const auto& t = truth[k];
    const auto& p = pred[k];
    if (t.width() != p.width() || t.height() != p.height() ||
        t.num_classes() != n || p.num_classes() != n) {
      fail(ErrorKind::Shape, "label map pair " + std::to_string(k) +
                                 " differs in dimensions or class count");
    }
    for (std::size_t i = 0; i < t.size(); ++i) ++counts[t[i] * n + p[i]];
  }
  std::vector<double> as_double(counts.begin(), counts.end());
  return ConfusionMatrix::from_counts(DenseMatrix(n, n, std::move(as_double)));
}

PenaltyMatrix build_cm_penalty(const ConfusionMatrix& c, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    fail(ErrorKind::Argument, "penalty scale must be positive");
  }
  const std::size_t n = c.num_classes();
  DenseMatrix w(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double conf = std::clamp(c.normalized(i, j), 0.0, 1.0);
      w(i, j) = scale * (1.0 - conf);
    }
  }
  return PenaltyMatrix(std::move(w), scale);
}

PenaltyMatrix build_hc_penalty(const HierarchySpec& h, double s_max, double p_within) {
  if (!(p_within >= 0.0) || !std::isfinite(s_max)) {
    fail(ErrorKind::Argument, "penalties must be finite and non-negative");
  }
  if (p_within > s_max) {
    fail(ErrorKind::Argument, "within-group penalty exceeds the maximum penalty");
  }
  const std::size_t n = h.num_classes();
  DenseMatrix w(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) w(i, j) = h.share_group(i, j) ? p_within : s_max;
    }
  }
  return PenaltyMatrix(std::move(w), s_max);
}

void save_penalty(const std::filesystem::path& path, const PenaltyMatrix& w) {
  if (path.extension() == ".csv") {
    csv::save_matrix(path, w.matrix());
  } else {
    dom1::save(path, dom1::to_tensor(w.matrix()));
  }
}

PenaltyMatrix load_penalty(const std::filesystem::path& path) {
  DenseMatrix m = path.extension() == ".csv" ? csv::load_matrix(path)
                                             : dom1::to_matrix(dom1::load(path));
  if (m.rows() != m.cols()) {
    fail(ErrorKind::Parse, path.string() + ": penalty matrix is " +
                               std::to_string(m.rows()) + "x" +
                               std::to_string(m.cols()) + ", not square");
  }
  try {
    return PenaltyMatrix::from_matrix(std::move(m));
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace domino
