#include "domino/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "domino/dom1.hpp"
#include "domino/parallel.hpp"
#include "domino/rng.hpp"

namespace domino {

namespace {

constexpr int kRowsPerChunk = 8;
constexpr std::uint64_t kInitStream = 2;
constexpr int kModelFormatVersion = 1;

std::size_t row_chunks(int height) {
  return static_cast<std::size_t>((height + kRowsPerChunk - 1) / kRowsPerChunk);
}

// Clamped patch around (x, y), row-major within the patch.
void gather_patch(const Image& img, int x, int y, int r, double* out) {
  const int w = img.width();
  const int h = img.height();
  for (int dy = -r; dy <= r; ++dy) {
    const int yy = std::clamp(y + dy, 0, h - 1);
    for (int dx = -r; dx <= r; ++dx) {
      *out++ = img.at(std::clamp(x + dx, 0, w - 1), yy);
    }
  }
}

void check_image(const PatchClassifier& m, const Image& image) {
  const int side = 2 * m.shape.patch_radius + 1;
  if (image.width() < side || image.height() < side) {
    fail(ErrorKind::Argument, "image " + std::to_string(image.width()) + "x" +
                                  std::to_string(image.height()) +
                                  " is smaller than the " + std::to_string(side) + "x" +
                                  std::to_string(side) + " patch");
  }
}

// Hidden activations and logits for every pixel.
void forward_buffers(const PatchClassifier& m, const Image& image, std::vector<double>& hidden,
                     std::vector<double>& logits) {
  check_image(m, image);
  const auto& s = m.shape;
  const auto& p = m.params;
  const std::size_t features = s.features();
  const auto hidden_units = static_cast<std::size_t>(s.hidden_units);
  const std::size_t classes = s.num_classes;
  const int width = image.width();
  const std::size_t pixels = static_cast<std::size_t>(width) * image.height();
  hidden.assign(pixels * hidden_units, 0.0);
  logits.assign(pixels * classes, 0.0);

  parallel_for_chunks(row_chunks(image.height()), [&](std::size_t chunk) {
    std::vector<double> patch(features);
    const int y_end = std::min(image.height(), static_cast<int>(chunk + 1) * kRowsPerChunk);
    for (int y = static_cast<int>(chunk) * kRowsPerChunk; y < y_end; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * width + x;
        gather_patch(image, x, y, s.patch_radius, patch.data());
        double* hv = hidden.data() + i * hidden_units;
        for (std::size_t u = 0; u < hidden_units; ++u) hv[u] = p.b1[u];
        for (std::size_t f = 0; f < features; ++f) {
          const double v = patch[f];
          const double* wrow = p.w1.data() + f * hidden_units;
          for (std::size_t u = 0; u < hidden_units; ++u) hv[u] += v * wrow[u];
        }
        for (std::size_t u = 0; u < hidden_units; ++u) hv[u] = std::tanh(hv[u]);
        double* zv = logits.data() + i * classes;
        for (std::size_t k = 0; k < classes; ++k) zv[k] = p.b2[k];
        for (std::size_t u = 0; u < hidden_units; ++u) {
          const double hu = hv[u];
          const double* wrow = p.w2.data() + u * classes;
          for (std::size_t k = 0; k < classes; ++k) zv[k] += hu * wrow[k];
        }
      }
    }
  });
}

void add_into(Parameters& acc, const Parameters& part) {
  for (std::size_t i = 0; i < acc.w1.size(); ++i) acc.w1[i] += part.w1[i];
  for (std::size_t i = 0; i < acc.b1.size(); ++i) acc.b1[i] += part.b1[i];
  for (std::size_t i = 0; i < acc.w2.size(); ++i) acc.w2[i] += part.w2[i];
  for (std::size_t i = 0; i < acc.b2.size(); ++i) acc.b2[i] += part.b2[i];
}

}  // namespace

void ClassifierShape::validate() const {
  if (patch_radius < 0 || patch_radius > 16) {
    fail(ErrorKind::Argument, "patch radius must be in [0, 16]");
  }
  if (hidden_units < 1 || hidden_units > 4096) {
    fail(ErrorKind::Argument, "hidden units must be in [1, 4096]");
  }
  if (num_classes < 2 || num_classes > kMaxClasses) {
    fail(ErrorKind::Argument, "classifier needs between 2 and 256 classes");
  }
}

Parameters Parameters::zeros(const ClassifierShape& shape) {
  shape.validate();
  const auto h = static_cast<std::size_t>(shape.hidden_units);
  Parameters p;
  p.w1.assign(shape.features() * h, 0.0);
  p.b1.assign(h, 0.0);
  p.w2.assign(h * shape.num_classes, 0.0);
  p.b2.assign(shape.num_classes, 0.0);
  return p;
}

double& Parameters::flat(std::size_t i) {
  if (i < w1.size()) return w1[i];
  i -= w1.size();
  if (i < b1.size()) return b1[i];
  i -= b1.size();
  if (i < w2.size()) return w2[i];
  i -= w2.size();
  return b2.at(i);
}

double Parameters::flat(std::size_t i) const {
  return const_cast<Parameters&>(*this).flat(i);
}

PatchClassifier PatchClassifier::initialize(const ClassifierShape& shape, std::uint64_t seed) {
  PatchClassifier m{shape, Parameters::zeros(shape)};
  CounterRng rng(seed, kInitStream);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(shape.features()));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(shape.hidden_units));
  for (double& v : m.params.w1) v = rng.uniform(-bound1, bound1);
  for (double& v : m.params.b1) v = rng.uniform(-bound1, bound1);
  for (double& v : m.params.w2) v = rng.uniform(-bound2, bound2);
  for (double& v : m.params.b2) v = rng.uniform(-bound2, bound2);
  return m;
}

void PatchClassifier::validate() const {
  shape.validate();
  const auto expected = Parameters::zeros(shape);
  if (params.w1.size() != expected.w1.size() || params.b1.size() != expected.b1.size() ||
      params.w2.size() != expected.w2.size() || params.b2.size() != expected.b2.size()) {
    fail(ErrorKind::Shape, "parameter blocks do not match the classifier shape");
  }
  for (std::size_t i = 0; i < params.count(); ++i) {
    if (!std::isfinite(params.flat(i))) fail(ErrorKind::Numeric, "non-finite parameter");
  }
}

LogitMap forward(const PatchClassifier& m, const Image& image) {
  std::vector<double> hidden, logits;
  forward_buffers(m, image, hidden, logits);
  return LogitMap(image.width(), image.height(), m.shape.num_classes, std::move(logits));
}

ProbMap predict(const PatchClassifier& m, const Image& image) {
  return softmax_map(forward(m, image));
}

BackwardResult backward(const PatchClassifier& m, const Image& image, const LabelMap& truth,
                        const PenaltyMatrix& w, const LossConfig& cfg) {
  if (truth.width() != image.width() || truth.height() != image.height()) {
    fail(ErrorKind::Shape, "image and truth differ in dimensions");
  }
  if (truth.num_classes() != m.shape.num_classes) {
    fail(ErrorKind::Shape, "truth class count " + std::to_string(truth.num_classes()) +
                               " differs from the model's " +
                               std::to_string(m.shape.num_classes));
  }
  std::vector<double> hidden, probs;
  forward_buffers(m, image, hidden, probs);
  const auto& s = m.shape;
  const std::size_t classes = s.num_classes;
  const auto hidden_units = static_cast<std::size_t>(s.hidden_units);
  const std::size_t features = s.features();
  const std::size_t pixels = truth.size();
  for (std::size_t i = 0; i < pixels; ++i) {
    softmax_inplace(std::span<double>(probs.data() + i * classes, classes));
  }

  std::vector<double> dz(probs.size());
  BackwardResult result;
  result.terms = detail::loss_grad_from_probs(probs, truth, w, cfg, dz);

  const std::size_t chunks = row_chunks(image.height());
  std::vector<Parameters> partial(chunks, Parameters::zeros(s));
  const int width = image.width();
  parallel_for_chunks(chunks, [&](std::size_t chunk) {
    Parameters& g = partial[chunk];
    std::vector<double> patch(features);
    std::vector<double> da(hidden_units);
    const int y_end = std::min(image.height(), static_cast<int>(chunk + 1) * kRowsPerChunk);
    for (int y = static_cast<int>(chunk) * kRowsPerChunk; y < y_end; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * width + x;
        const double* hv = hidden.data() + i * hidden_units;
        const double* dzv = dz.data() + i * classes;
        for (std::size_t k = 0; k < classes; ++k) g.b2[k] += dzv[k];
        for (std::size_t u = 0; u < hidden_units; ++u) {
          const double* w2row = m.params.w2.data() + u * classes;
          double* g2row = g.w2.data() + u * classes;
          double dh = 0.0;
          for (std::size_t k = 0; k < classes; ++k) {
            g2row[k] += hv[u] * dzv[k];
            dh += w2row[k] * dzv[k];
          }
          da[u] = dh * (1.0 - hv[u] * hv[u]);
          g.b1[u] += da[u];
        }
        gather_patch(image, x, y, s.patch_radius, patch.data());
        for (std::size_t f = 0; f < features; ++f) {
          double* g1row = g.w1.data() + f * hidden_units;
          for (std::size_t u = 0; u < hidden_units; ++u) g1row[u] += patch[f] * da[u];
        }
      }
    }
  });
  result.grads = Parameters::zeros(s);
  for (const auto& part : partial) add_into(result.grads, part);
  return result;
}

void TrainConfig::validate() const {
  if (iterations == 0) fail(ErrorKind::Argument, "iterations must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorKind::Argument, "learning_rate must be positive");
  }
  if (eval_interval == 0) fail(ErrorKind::Argument, "eval_interval must be positive");
  if (!(scale > 0.0) || !std::isfinite(scale)) fail(ErrorKind::Argument, "scale must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    fail(ErrorKind::Argument, "Adam decay rates must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) fail(ErrorKind::Argument, "adam_epsilon must be positive");
  loss.validate();
}

TrainResult train(std::span<const PhantomSample> data, std::size_t num_classes,
                  const TrainConfig& cfg, const PenaltyMatrix* w) {
  cfg.validate();
  if (data.empty()) fail(ErrorKind::Argument, "training set is empty");
  const ClassifierShape shape{cfg.patch_radius, cfg.hidden_units, num_classes};
  shape.validate();
  for (const auto& s : data) {
    if (s.truth.num_classes() != num_classes) {
      fail(ErrorKind::Shape, "training truth class count differs from the classifier's");
    }
  }

  LossConfig loss = cfg.loss;
  const PenaltyMatrix zero = PenaltyMatrix::zeros(num_classes);
  if (w == nullptr) {
    loss.beta = 0.0;
    w = &zero;
  } else if (w->size() != num_classes) {
    fail(ErrorKind::Shape, "penalty matrix size differs from the class count");
  }

  TrainResult result{PatchClassifier::initialize(shape, cfg.seed), {}};
  result.model.trained_on = fingerprint(data);
  Parameters& params = result.model.params;
  Parameters m1 = Parameters::zeros(shape);
  Parameters m2 = Parameters::zeros(shape);
  const std::size_t count = params.count();

  double b1_pow = 1.0;
  double b2_pow = 1.0;
  double window = 0.0;
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    const auto& sample = data[(it - 1) % data.size()];
    BackwardResult step;
    try {
      step = backward(result.model, sample.image, sample.truth, *w, loss);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numeric) throw;
      fail(ErrorKind::Training, "training diverged at iteration " + std::to_string(it) +
                                    ": " + e.what());
    }
    b1_pow *= cfg.adam_beta1;
    b2_pow *= cfg.adam_beta2;
    const double step_size = cfg.learning_rate / (1.0 - b1_pow);
    const double v_correction = 1.0 / (1.0 - b2_pow);
    for (std::size_t i = 0; i < count; ++i) {
      const double g = step.grads.flat(i);
      double& m = m1.flat(i);
      double& v = m2.flat(i);
      m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
      v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g * g;
      params.flat(i) -= step_size * m / (std::sqrt(v * v_correction) + cfg.adam_epsilon);
    }
    window += step.terms.total;
    if (it % cfg.eval_interval == 0) {
      result.trace.push_back({it, window / static_cast<double>(cfg.eval_interval)});
      window = 0.0;
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(params.flat(i))) {
      fail(ErrorKind::Training, "training produced non-finite parameters");
    }
  }
  return result;
}

void write_model(std::ostream& out, const PatchClassifier& m) {
  m.validate();
  char header[256];
  std::snprintf(header, sizeof header,
                "DOM1-MODEL %d patch_radius=%d hidden_units=%d num_classes=%zu "
                "activation=tanh trained_on=%016llx blocks=w1,b1,w2,b2\n",
                kModelFormatVersion, m.shape.patch_radius, m.shape.hidden_units,
                m.shape.num_classes, static_cast<unsigned long long>(m.trained_on));
  out << header;
  const auto h = static_cast<std::size_t>(m.shape.hidden_units);
  auto block = [&](const std::vector<double>& v, std::vector<std::size_t> shape) {
    dom1::Tensor t;
    t.shape = std::move(shape);
    t.f64 = v;
    dom1::write(out, t);
  };
  block(m.params.w1, {m.shape.features(), h});
  block(m.params.b1, {h});
  block(m.params.w2, {h, m.shape.num_classes});
  block(m.params.b2, {m.shape.num_classes});
}

PatchClassifier read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Parse, "model file is empty");
  std::istringstream fields(line);
  std::string magic;
  int version = 0;
  if (!(fields >> magic) || magic != "DOM1-MODEL") {
    fail(ErrorKind::Parse, "not a DOM1 model file");
  }
  if (!(fields >> version)) fail(ErrorKind::Parse, "model header lacks a version");
  if (version != kModelFormatVersion) {
    fail(ErrorKind::Unsupported, "unsupported model format version " +
                                     std::to_string(version) + " (expected " +
                                     std::to_string(kModelFormatVersion) + ")");
  }
  PatchClassifier m;
  bool have_r = false, have_h = false, have_n = false, have_blocks = false;
  std::string kv;
  while (fields >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Parse, "bad model header field '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    try {
      if (key == "patch_radius") {
        m.shape.patch_radius = std::stoi(value);
        have_r = true;
      } else if (key == "hidden_units") {
        m.shape.hidden_units = std::stoi(value);
        have_h = true;
      } else if (key == "num_classes") {
        m.shape.num_classes = std::stoul(value);
        have_n = true;
      } else if (key == "activation") {
        if (value != "tanh") fail(ErrorKind::Unsupported, "unsupported activation " + value);
      } else if (key == "trained_on") {
        m.trained_on = std::stoull(value, nullptr, 16);
      } else if (key == "blocks") {
        if (value != "w1,b1,w2,b2") fail(ErrorKind::Parse, "unexpected block list " + value);
        have_blocks = true;
      } else {
        fail(ErrorKind::Parse, "unknown model header field '" + key + "'");
      }
    } catch (const std::logic_error&) {
      fail(ErrorKind::Parse, "bad value in model header field '" + kv + "'");
    }
  }
  if (!have_r || !have_h || !have_n || !have_blocks) {
    fail(ErrorKind::Parse, "model header is missing required fields");
  }
  try {
    m.shape.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Parse, std::string("model header: ") + e.what());
  }
  const auto expected = Parameters::zeros(m.shape);
  auto block = [&](std::vector<double>& dst, std::size_t size, const char* name) {
    dom1::Tensor t = dom1::read(in);
    if (t.dtype != dom1::DType::F64 || t.element_count() != size) {
      fail(ErrorKind::Parse, std::string("model block ") + name + " has the wrong shape");
    }
    dst = std::move(t.f64);
  };
  block(m.params.w1, expected.w1.size(), "w1");
  block(m.params.b1, expected.b1.size(), "b1");
  block(m.params.w2, expected.w2.size(), "w2");
  block(m.params.b2, expected.b2.size(), "b2");
  m.validate();
  return m;
}

void save_model(const std::filesystem::path& path, const PatchClassifier& m) {
  std::ostringstream out(std::ios::binary);
  write_model(out, m);
  write_file_atomic(path, out.str());
}

PatchClassifier load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open model " + path.string());
  try {
    return read_model(in);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace domino
