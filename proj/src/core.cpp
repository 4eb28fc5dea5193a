#include "domino/core.hpp"

#include <cmath>
#include <set>

namespace domino {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Index: return "index error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Argument: return "argument error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Dataset: return "dataset error";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Training: return "training error";
    case ErrorKind::Io: return "io error";
  }
  return "error";
}

namespace {

std::size_t grid_size(int width, int height) {
  if (width <= 0 || height <= 0) {
    fail(ErrorKind::Shape, "grid dimensions must be positive, got " +
                               std::to_string(width) + "x" +
                               std::to_string(height));
  }
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

void check_class_count(std::size_t n) {
  if (n == 0 || n > kMaxClasses) {
    fail(ErrorKind::Argument,
         "class count must be in [1, 256], got " + std::to_string(n));
  }
}

}  // namespace

LabelMap::LabelMap(int width, int height, std::size_t num_classes,
                   std::vector<std::uint8_t> data)
    : width_(width), height_(height), num_classes_(num_classes),
      data_(std::move(data)) {
  check_class_count(num_classes_);
  if (data_.size() != grid_size(width_, height_)) {
    fail(ErrorKind::Shape, "label data length " + std::to_string(data_.size()) +
                               " does not match " + std::to_string(width_) +
                               "x" + std::to_string(height_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] >= num_classes_) {
      fail(ErrorKind::Validation, "label " + std::to_string(data_[i]) +
                                      " at pixel " + std::to_string(i) +
                                      " is not below class count " +
                                      std::to_string(num_classes_));
    }
  }
}

LabelMap::LabelMap(int width, int height, std::size_t num_classes,
                   std::uint8_t fill)
    : LabelMap(width, height, num_classes,
               std::vector<std::uint8_t>(grid_size(width, height), fill)) {}

ProbMap::ProbMap(int width, int height, std::size_t num_classes,
                 std::vector<double> data)
    : width_(width), height_(height), num_classes_(num_classes),
      data_(std::move(data)) {
  check_class_count(num_classes_);
  const std::size_t pixels = grid_size(width_, height_);
  if (data_.size() != pixels * num_classes_) {
    fail(ErrorKind::Shape, "probability data length " +
                               std::to_string(data_.size()) + " does not match " +
                               std::to_string(pixels) + " pixels x " +
                               std::to_string(num_classes_) + " classes");
  }
  for (std::size_t i = 0; i < pixels; ++i) {
    double sum = 0.0;
    for (double v : pixel(i)) {
      if (!(v >= 0.0 && v <= 1.0)) {
        fail(ErrorKind::Validation, "probability outside [0,1] at pixel " +
                                        std::to_string(i));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance) {
      fail(ErrorKind::Validation,
           "channel sum at pixel " + std::to_string(i) + " deviates from 1");
    }
  }
}

LogitMap::LogitMap(int width, int height, std::size_t num_classes,
                   std::vector<double> data)
    : width_(width), height_(height), num_classes_(num_classes),
      data_(std::move(data)) {
  check_class_count(num_classes_);
  if (data_.size() != grid_size(width_, height_) * num_classes_) {
    fail(ErrorKind::Shape, "logit data length does not match grid");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) fail(ErrorKind::Numeric, "non-finite logit");
  }
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    fail(ErrorKind::Shape, "matrix data length " + std::to_string(data_.size()) +
                               " does not match " + std::to_string(rows_) + "x" +
                               std::to_string(cols_));
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (data_.size() != grid_size(width_, height_)) {
    fail(ErrorKind::Shape, "image data length does not match grid");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) fail(ErrorKind::Numeric, "non-finite intensity");
  }
}

ClassSet::ClassSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) {
    fail(ErrorKind::Config, "a class set needs at least 2 classes");
  }
  if (names_.size() > kMaxClasses) {
    fail(ErrorKind::Config, "too many classes");
  }
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) fail(ErrorKind::Config, "empty class name");
    if (!seen.insert(n).second) {
      fail(ErrorKind::Config, "duplicate class name '" + n + "'");
    }
  }
}

std::size_t ClassSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  fail(ErrorKind::Config, "unknown class '" + name + "'");
}

std::vector<double> one_hot(std::size_t label, std::size_t n) {
  if (label >= n) {
    fail(ErrorKind::Index, "label " + std::to_string(label) +
                               " out of range for " + std::to_string(n) +
                               " classes");
  }
  std::vector<double> v(n, 0.0);
  v[label] = 1.0;
  return v;
}

ProbMap one_hot_map(const LabelMap& labels) {
  const std::size_t n = labels.num_classes();
  std::vector<double> data(labels.size() * n, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) data[i * n + labels[i]] = 1.0;
  return ProbMap(labels.width(), labels.height(), n, std::move(data));
}

LabelMap argmax_map(const ProbMap& p) {
  std::vector<std::uint8_t> out(p.num_pixels());
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto px = p.pixel(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < px.size(); ++c) {
      if (px[c] > px[best]) best = c;
    }
    out[i] = static_cast<std::uint8_t>(best);
  }
  return LabelMap(p.width(), p.height(), p.num_classes(), std::move(out));
}

std::vector<Pixel> binary_mask(const LabelMap& labels, std::size_t cls) {
  if (cls >= labels.num_classes()) {
    fail(ErrorKind::Index, "class " + std::to_string(cls) + " out of range");
  }
  std::vector<Pixel> out;
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      if (labels.at(x, y) == cls) out.push_back({x, y});
    }
  }
  return out;
}

}  // namespace domino
