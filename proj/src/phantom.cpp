#include "domino/phantom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "domino/dom1.hpp"
#include "domino/rng.hpp"

namespace domino {

namespace {

constexpr std::uint64_t kJitterStream = 0;
constexpr std::uint64_t kNoiseStream = 1;

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed) ^ mix64(index + 0x632BE59BD9B4E019ull);
}

}  // namespace

void PhantomConfig::validate() const {
  if (size < 16) fail(ErrorKind::Config, "phantom size must be at least 16");
  if (class_means.size() < 2 || class_means.size() > kMaxClasses) {
    fail(ErrorKind::Config, "phantom needs between 2 and 256 class means");
  }
  for (double m : class_means) {
    if (!(m >= 0.0 && m <= 1.0)) fail(ErrorKind::Config, "class means must lie in [0,1]");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    fail(ErrorKind::Config, "noise_sigma must be non-negative");
  }
  if (!(blur_radius >= 0.0) || !std::isfinite(blur_radius)) {
    fail(ErrorKind::Config, "blur_radius must be non-negative");
  }
  if (!(center_jitter >= 0.0 && center_jitter < 0.5) ||
      !(scale_jitter >= 0.0 && scale_jitter < 1.0)) {
    fail(ErrorKind::Config, "jitter out of range");
  }
  if (background >= num_classes()) {
    fail(ErrorKind::Config, "background class " + std::to_string(background) +
                                " is not below class count " +
                                std::to_string(num_classes()));
  }
  for (const auto& e : layout) {
    if (e.cls >= num_classes()) {
      fail(ErrorKind::Config, "layout references class " + std::to_string(e.cls) +
                                  " but only " + std::to_string(num_classes()) +
                                  " classes are configured");
    }
    if (!(e.rx > 0.0) || !(e.ry > 0.0) || !std::isfinite(e.cx) || !std::isfinite(e.cy)) {
      fail(ErrorKind::Config, "layout ellipse needs positive radii");
    }
  }
}

LabelMap render_layout(const PhantomConfig& cfg, std::uint64_t index) {
  cfg.validate();
  CounterRng rng(sample_seed(cfg.seed, index), kJitterStream);
  const double size = cfg.size;
  const double dx = rng.uniform(-cfg.center_jitter, cfg.center_jitter) * size;
  const double dy = rng.uniform(-cfg.center_jitter, cfg.center_jitter) * size;
  const double sx = 1.0 + rng.uniform(-cfg.scale_jitter, cfg.scale_jitter);
  const double sy = 1.0 + rng.uniform(-cfg.scale_jitter, cfg.scale_jitter);

  // Jitter scales the layout about the image centre, then shifts it.
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(cfg.size) * cfg.size,
                                   static_cast<std::uint8_t>(cfg.background));
  const double mid = 0.5 * size;
  for (const auto& e : cfg.layout) {
    const double cx = mid + (e.cx * size - mid) * sx + dx;
    const double cy = mid + (e.cy * size - mid) * sy + dy;
    const double rx = e.rx * size * sx;
    const double ry = e.ry * size * sy;
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - rx)) - 1);
    const int x1 = std::min(cfg.size - 1, static_cast<int>(std::ceil(cx + rx)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - ry)) - 1);
    const int y1 = std::min(cfg.size - 1, static_cast<int>(std::ceil(cy + ry)) + 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double u = (x + 0.5 - cx) / rx;
        const double v = (y + 0.5 - cy) / ry;
        if (u * u + v * v <= 1.0) {
          labels[static_cast<std::size_t>(y) * cfg.size + x] =
              static_cast<std::uint8_t>(e.cls);
        }
      }
    }
  }
  return LabelMap(cfg.size, cfg.size, cfg.num_classes(), std::move(labels));
}

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * (k * k) / (sigma * sigma));
    total += kernel[k + radius];
  }
  for (double& k : kernel) k /= total;

  const int w = img.width();
  const int h = img.height();
  std::vector<double> tmp(static_cast<std::size_t>(w) * h);
  std::vector<double> out(tmp.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        s += kernel[k + radius] * img.at(std::clamp(x + k, 0, w - 1), y);
      }
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        s += kernel[k + radius] * tmp[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  return Image(w, h, std::move(out));
}

PhantomSample generate(const PhantomConfig& cfg, std::uint64_t index) {
  LabelMap truth = render_layout(cfg, index);
  std::vector<double> clean(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) clean[i] = cfg.class_means[truth[i]];
  Image image = gaussian_blur(Image(cfg.size, cfg.size, std::move(clean)), cfg.blur_radius);

  if (cfg.noise_sigma > 0.0) {
    CounterRng rng(sample_seed(cfg.seed, index), kNoiseStream);
    std::vector<double> noisy(image.data().begin(), image.data().end());
    for (double& v : noisy) v = std::clamp(v + cfg.noise_sigma * rng.normal(), 0.0, 1.0);
    image = Image(cfg.size, cfg.size, std::move(noisy));
  }
  return {std::move(image), std::move(truth)};
}

std::vector<PhantomSample> generate_set(const PhantomConfig& cfg, std::uint64_t first_index,
                                        std::size_t count) {
  std::vector<PhantomSample> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(generate(cfg, first_index + k));
  return out;
}

void save_dataset(const std::filesystem::path& dir, std::span<const PhantomSample> samples) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    fail(ErrorKind::Io, "cannot create dataset directory " + dir.string());
  }
  std::ostringstream manifest;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    char id[32];
    std::snprintf(id, sizeof id, "s%04zu", k);
    const std::string image_file = std::string(id) + "_image.dom";
    const std::string truth_file = std::string(id) + "_truth.dom";
    dom1::save(dir / image_file, dom1::to_tensor(samples[k].image));
    dom1::save(dir / truth_file, dom1::to_tensor(samples[k].truth));
    manifest << id << ' ' << image_file << ' ' << truth_file << '\n';
  }
  write_file_atomic(dir / "manifest.txt", manifest.str());
}

std::vector<PhantomSample> load_dataset(const std::filesystem::path& dir,
                                        std::size_t num_classes) {
  const auto manifest_path = dir / "manifest.txt";
  std::ifstream manifest(manifest_path);
  if (!manifest) fail(ErrorKind::Dataset, "dataset manifest missing: " + manifest_path.string());

  std::vector<PhantomSample> samples;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string id, image_file, truth_file, extra;
    if (!(fields >> id >> image_file >> truth_file) || (fields >> extra)) {
      fail(ErrorKind::Dataset, manifest_path.string() + " line " + std::to_string(line_no) +
                                   ": expected '<id> <image> <truth>'");
    }
    if (!ids.insert(id).second) {
      fail(ErrorKind::Dataset, "duplicate sample id '" + id + "'");
    }
    for (const auto& f : {image_file, truth_file}) {
      if (!std::filesystem::is_regular_file(dir / f)) {
        fail(ErrorKind::Dataset, "sample '" + id + "': missing file " + (dir / f).string());
      }
    }
    try {
      Image image = dom1::to_image(dom1::load(dir / image_file));
      LabelMap truth = dom1::to_label_map(dom1::load(dir / truth_file), num_classes);
      if (image.width() != truth.width() || image.height() != truth.height()) {
        fail(ErrorKind::Dataset, "image and truth differ in size");
      }
      samples.push_back({std::move(image), std::move(truth)});
    } catch (const Error& e) {
      fail(ErrorKind::Dataset, "sample '" + id + "': " + e.what());
    }
  }
  return samples;
}

std::uint64_t fingerprint(std::span<const PhantomSample> samples) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  feed(samples.size());
  for (const auto& s : samples) {
    feed(static_cast<std::uint64_t>(s.image.width()));
    feed(static_cast<std::uint64_t>(s.image.height()));
    for (double v : s.image.data()) feed(std::bit_cast<std::uint64_t>(v));
    for (auto l : s.truth.data()) feed(l);
  }
  return h;
}

}  // namespace domino
