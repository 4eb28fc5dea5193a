#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "domino/core.hpp"

namespace domino {

/// Axis-aligned ellipse in image-relative units (0..1 of the side length).
struct Ellipse {
  std::size_t cls = 0;
  double cx = 0.5;
  double cy = 0.5;
  double rx = 0.1;
  double ry = 0.1;
};

struct PhantomConfig {
  int size = 64;
  std::vector<double> class_means;
  double noise_sigma = 0.05;
  double blur_radius = 1.0;  // Gaussian sigma in pixels; 0 disables blur
  std::size_t background = 0;
  // Painted in order; later entries overwrite earlier ones.
  std::vector<Ellipse> layout;
  // Per-sample rigid jitter of the whole layout.
  double center_jitter = 0.03;  // max shift, fraction of side length
  double scale_jitter = 0.05;   // max relative radius change
  std::uint64_t seed = 1;

  std::size_t num_classes() const noexcept { return class_means.size(); }
  void validate() const;
};

struct PhantomSample {
  Image image;
  LabelMap truth;

  friend bool operator==(const PhantomSample&, const PhantomSample&) = default;
};

PhantomSample generate(const PhantomConfig& cfg, std::uint64_t index);
std::vector<PhantomSample> generate_set(const PhantomConfig& cfg,
                                        std::uint64_t first_index,
                                        std::size_t count);

/// Truth only (what `generate` produces before intensities are rendered).
LabelMap render_layout(const PhantomConfig& cfg, std::uint64_t index);

// Separable Gaussian blur with edge clamping, kernel truncated at 3 sigma.
Image gaussian_blur(const Image& img, double sigma);

// Directory of DOM1 pairs plus `manifest.txt` with `<id> <image> <truth>` lines.
void save_dataset(const std::filesystem::path& dir,
                  std::span<const PhantomSample> samples);
std::vector<PhantomSample> load_dataset(const std::filesystem::path& dir,
                                        std::size_t num_classes);

// FNV-1a over all image and truth bytes.
std::uint64_t fingerprint(std::span<const PhantomSample> samples);

}  // namespace domino
