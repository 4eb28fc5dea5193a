#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "domino/core.hpp"
#include "domino/loss.hpp"
#include "domino/penalty.hpp"
#include "domino/phantom.hpp"

namespace domino {

struct ClassifierShape {
  int patch_radius = 2;
  int hidden_units = 16;
  std::size_t num_classes = 0;

  std::size_t features() const noexcept {
    const auto side = static_cast<std::size_t>(2 * patch_radius + 1);
    return side * side;
  }
  void validate() const;

  friend bool operator==(const ClassifierShape&, const ClassifierShape&) = default;
};

/// Parameter blocks of the patch MLP. Also used to hold gradients.
struct Parameters {
  std::vector<double> w1;  // features x hidden, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden x classes, row-major
  std::vector<double> b2;  // classes

  static Parameters zeros(const ClassifierShape& shape);
  std::size_t count() const noexcept { return w1.size() + b1.size() + w2.size() + b2.size(); }
  // Flat view in block order w1, b1, w2, b2.
  double& flat(std::size_t i);
  double flat(std::size_t i) const;

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

/// Shared-weight two-layer classifier: clamped (2r+1)^2 intensity patch ->
/// tanh hidden layer -> class logits.
struct PatchClassifier {
  ClassifierShape shape;
  Parameters params;
  // Fingerprint of the training set, 0 when unknown.
  std::uint64_t trained_on = 0;

  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] from CounterRng(seed, 2).
  static PatchClassifier initialize(const ClassifierShape& shape, std::uint64_t seed);
  void validate() const;

  friend bool operator==(const PatchClassifier&, const PatchClassifier&) = default;
};

LogitMap forward(const PatchClassifier& m, const Image& image);
ProbMap predict(const PatchClassifier& m, const Image& image);

struct BackwardResult {
  LossTerms terms;
  Parameters grads;
};

BackwardResult backward(const PatchClassifier& m, const Image& image, const LabelMap& truth,
                        const PenaltyMatrix& w, const LossConfig& cfg);

struct TrainConfig {
  std::size_t iterations = 3000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  double scale = kDefaultPenaltyScale;
  std::size_t eval_interval = 50;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int patch_radius = 2;
  int hidden_units = 16;
  LossConfig loss;

  void validate() const;
};

struct TracePoint {
  std::size_t iteration = 0;
  double loss = 0.0;  // mean training loss over the preceding eval_interval iterations
};

struct TrainResult {
  PatchClassifier model;
  std::vector<TracePoint> trace;
};

/// Adam on one full image per iteration, visiting samples round-robin.
/// `w == nullptr` trains the unregularized base model (beta treated as 0).
TrainResult train(std::span<const PhantomSample> data, std::size_t num_classes,
                  const TrainConfig& cfg, const PenaltyMatrix* w = nullptr);

void save_model(const std::filesystem::path& path, const PatchClassifier& m);
PatchClassifier load_model(const std::filesystem::path& path);
void write_model(std::ostream& out, const PatchClassifier& m);
PatchClassifier read_model(std::istream& in);

}  // namespace domino
