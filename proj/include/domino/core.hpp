#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "domino/errors.hpp"

namespace domino {

inline constexpr double kProbSumTolerance = 1e-6;

// Largest class count a LabelMap can carry; labels are stored as u8 on disk.
inline constexpr std::size_t kMaxClasses = 256;

struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// 2D grid of class indices, row-major.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int width, int height, std::size_t num_classes,
           std::vector<std::uint8_t> data);
  // All pixels set to `fill`.
  LabelMap(int width, int height, std::size_t num_classes,
           std::uint8_t fill = 0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t at(int x, int y) const { return data_[index(x, y)]; }
  std::size_t operator[](std::size_t i) const { return data_[i]; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Per-pixel class probability vectors, row-major with channels innermost.
/// Construction rejects entries outside [0,1] and pixels whose channel sum
/// deviates from 1 by more than kProbSumTolerance.
class ProbMap {
 public:
  ProbMap() = default;
  ProbMap(int width, int height, std::size_t num_classes,
          std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t num_pixels() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::span<const double> pixel(std::size_t i) const {
    return {data_.data() + i * num_classes_, num_classes_};
  }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const ProbMap&, const ProbMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<double> data_;
};

/// Pre-softmax activations, same layout as ProbMap. Entries must be finite.
class LogitMap {
 public:
  LogitMap() = default;
  LogitMap(int width, int height, std::size_t num_classes,
           std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t num_pixels() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::span<const double> pixel(std::size_t i) const {
    return {data_.data() + i * num_classes_, num_classes_};
  }
  std::span<const double> data() const noexcept { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<double> data_;
};

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Intensity grid in [0,1] (phantom images, classifier input).
class Image {
 public:
  Image() = default;
  Image(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double at(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(x)];
  }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Ordered, unique class names.
class ClassSet {
 public:
  ClassSet() = default;
  explicit ClassSet(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  // Throws Config when the name is unknown.
  std::size_t index_of(const std::string& name) const;

  friend bool operator==(const ClassSet&, const ClassSet&) = default;

 private:
  std::vector<std::string> names_;
};

std::vector<double> one_hot(std::size_t label, std::size_t n);

/// ProbMap whose every pixel is the one-hot encoding of `labels`.
ProbMap one_hot_map(const LabelMap& labels);

/// Per-pixel argmax; ties go to the lowest class index.
LabelMap argmax_map(const ProbMap& p);

/// Pixels of class `cls`, in row-major order.
std::vector<Pixel> binary_mask(const LabelMap& labels, std::size_t cls);

}  // namespace domino
