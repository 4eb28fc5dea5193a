#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <unistd.h>

#include "domino/core.hpp"
#include "domino/errors.hpp"
#include "domino/rng.hpp"

namespace testing {

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("domino_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline double rel_error(double analytic, double numeric, double floor = 1e-6) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

inline domino::LabelMap random_labels(domino::CounterRng& rng, int w, int h, std::size_t n) {
  std::vector<std::uint8_t> d(static_cast<std::size_t>(w * h));
  for (auto& v : d) v = static_cast<std::uint8_t>(rng.next_u64() % n);
  return domino::LabelMap(w, h, n, std::move(d));
}

inline domino::LogitMap random_logits(domino::CounterRng& rng, int w, int h, std::size_t n,
                                      double spread = 2.0) {
  std::vector<double> d(static_cast<std::size_t>(w * h) * n);
  for (auto& v : d) v = rng.uniform(-spread, spread);
  return domino::LogitMap(w, h, n, std::move(d));
}

inline domino::ProbMap random_probs(domino::CounterRng& rng, int w, int h, std::size_t n) {
  std::vector<double> d(static_cast<std::size_t>(w * h) * n);
  for (std::size_t p = 0; p < static_cast<std::size_t>(w * h); ++p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += d[p * n + k] = rng.uniform() + 1e-3;
    for (std::size_t k = 0; k < n; ++k) d[p * n + k] /= sum;
  }
  return domino::ProbMap(w, h, n, std::move(d));
}

template <typename F>
domino::ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const domino::Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected a domino::Error");
}

}  // namespace testing
