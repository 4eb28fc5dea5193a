#include "domino/loss.hpp"

#include <algorithm>
#include <cmath>

namespace domino {

void LossConfig::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    fail(ErrorKind::Argument, "beta must lie in [0, 1]");
  }
  if (!(lambda_ce >= 0.0) || !(lambda_dice >= 0.0) ||
      !std::isfinite(lambda_ce) || !std::isfinite(lambda_dice)) {
    fail(ErrorKind::Argument, "loss weights must be finite and non-negative");
  }
  if (lambda_ce == 0.0 && lambda_dice == 0.0) {
    fail(ErrorKind::Argument, "lambda_ce and lambda_dice cannot both be zero");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    fail(ErrorKind::Argument, "epsilon must be positive");
  }
}

namespace {

void check_pair(std::size_t pixels, std::size_t classes, int width, int height,
                const LabelMap& t) {
  if (t.width() != width || t.height() != height || t.size() != pixels) {
    fail(ErrorKind::Shape, "prediction and truth differ in dimensions");
  }
  if (t.num_classes() != classes) {
    fail(ErrorKind::Shape, "prediction and truth differ in class count");
  }
}

void check_penalty(const PenaltyMatrix& w, std::size_t classes) {
  if (w.size() != classes) {
    fail(ErrorKind::Shape, "penalty matrix is " + std::to_string(w.size()) + "x" +
                               std::to_string(w.size()) + " but there are " +
                               std::to_string(classes) + " classes");
  }
}

}  // namespace

void softmax_inplace(std::span<double> v) {
  const double peak = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - peak);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

ProbMap softmax_map(const LogitMap& z) {
  std::vector<double> out(z.data().begin(), z.data().end());
  const std::size_t n = z.num_classes();
  for (std::size_t i = 0; i < z.num_pixels(); ++i) {
    softmax_inplace(std::span<double>(out.data() + i * n, n));
  }
  return ProbMap(z.width(), z.height(), n, std::move(out));
}

double cross_entropy(const ProbMap& p, const LabelMap& t, double epsilon) {
  check_pair(p.num_pixels(), p.num_classes(), p.width(), p.height(), t);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.num_pixels(); ++i) {
    sum -= std::log(p.pixel(i)[t[i]] + epsilon);
  }
  return sum / static_cast<double>(p.num_pixels());
}

double soft_dice_loss(const ProbMap& p, const LabelMap& t, double epsilon) {
  check_pair(p.num_pixels(), p.num_classes(), p.width(), p.height(), t);
  const std::size_t n = p.num_classes();
  std::vector<double> inter(n, 0.0), pred(n, 0.0), truth(n, 0.0);
  for (std::size_t i = 0; i < p.num_pixels(); ++i) {
    auto px = p.pixel(i);
    for (std::size_t c = 0; c < n; ++c) pred[c] += px[c];
    inter[t[i]] += px[t[i]];
    truth[t[i]] += 1.0;
  }
  double mean = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double denom = pred[c] + truth[c] + epsilon;
    mean += denom > 0.0 ? (2.0 * inter[c] + epsilon) / denom : 1.0;
  }
  return 1.0 - mean / static_cast<double>(n);
}

double domino_penalty(const ProbMap& p, const LabelMap& t, const PenaltyMatrix& w) {
  check_pair(p.num_pixels(), p.num_classes(), p.width(), p.height(), t);
  check_penalty(w, p.num_classes());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.num_pixels(); ++i) {
    auto px = p.pixel(i);
    auto row = w.row(t[i]);
    double s = 0.0;
    for (std::size_t j = 0; j < px.size(); ++j) s += row[j] * px[j];
    sum += s;
  }
  return sum / static_cast<double>(p.num_pixels());
}

namespace detail {

LossTerms loss_grad_from_probs(std::span<const double> probs, const LabelMap& t,
                               const PenaltyMatrix& w, const LossConfig& cfg,
                               std::span<double> grad) {
  cfg.validate();
  const std::size_t pixels = t.size();
  const std::size_t n = t.num_classes();
  check_penalty(w, n);
  if (probs.size() != pixels * n || grad.size() != probs.size()) {
    fail(ErrorKind::Shape, "logit buffer does not match the label map");
  }
  const double inv_pixels = 1.0 / static_cast<double>(pixels);
  const double eps = cfg.epsilon;

  // Soft Dice needs per-class totals before any pixel gradient.
  std::vector<double> inter(n, 0.0), pred(n, 0.0), truth(n, 0.0);
  for (std::size_t i = 0; i < pixels; ++i) {
    const double* px = probs.data() + i * n;
    for (std::size_t c = 0; c < n; ++c) pred[c] += px[c];
    inter[t[i]] += px[t[i]];
    truth[t[i]] += 1.0;
  }
  std::vector<double> denom(n), dice_num(n);
  double dice_mean = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    denom[c] = pred[c] + truth[c] + eps;
    dice_num[c] = 2.0 * inter[c] + eps;
    dice_mean += dice_num[c] / denom[c];
  }
  dice_mean /= static_cast<double>(n);

  LossTerms terms;
  terms.soft_dice = 1.0 - dice_mean;
  const double dice_scale = -cfg.lambda_dice / static_cast<double>(n);

  std::vector<double> g(n);
  double ce_sum = 0.0;
  double penalty_sum = 0.0;
  for (std::size_t i = 0; i < pixels; ++i) {
    const double* px = probs.data() + i * n;
    double* gz = grad.data() + i * n;
    const std::size_t c = t[i];
    auto wrow = w.row(c);

    ce_sum -= std::log(px[c] + eps);
    double pen = 0.0;
    for (std::size_t k = 0; k < n; ++k) pen += wrow[k] * px[k];
    penalty_sum += pen;

    // g = dL/dp for this pixel.
    for (std::size_t k = 0; k < n; ++k) {
      const double y = k == c ? 1.0 : 0.0;
      const double d_dice =
          (2.0 * y * denom[k] - dice_num[k]) / (denom[k] * denom[k]);
      g[k] = dice_scale * d_dice + cfg.beta * wrow[k] * inv_pixels;
    }
    g[c] -= cfg.lambda_ce * inv_pixels / (px[c] + eps);

    // Softmax Jacobian: dL/dz_k = p_k (g_k - sum_j g_j p_j).
    double gp = 0.0;
    for (std::size_t k = 0; k < n; ++k) gp += g[k] * px[k];
    for (std::size_t k = 0; k < n; ++k) gz[k] = px[k] * (g[k] - gp);
  }
  terms.cross_entropy = ce_sum / static_cast<double>(pixels);
  terms.penalty = penalty_sum / static_cast<double>(pixels);
  terms.total = cfg.lambda_ce * terms.cross_entropy +
                cfg.lambda_dice * terms.soft_dice + cfg.beta * terms.penalty;
  if (!std::isfinite(terms.total)) fail(ErrorKind::Numeric, "non-finite loss");
  return terms;
}

}  // namespace detail

LossAndGrad total_loss_and_grad(const LogitMap& z, const LabelMap& t,
                                const PenaltyMatrix& w, const LossConfig& cfg) {
  check_pair(z.num_pixels(), z.num_classes(), z.width(), z.height(), t);
  const ProbMap p = softmax_map(z);
  std::vector<double> grad(p.data().size());
  LossTerms terms = detail::loss_grad_from_probs(p.data(), t, w, cfg, grad);
  return {terms, LogitMap(z.width(), z.height(), z.num_classes(), std::move(grad))};
}

}  // namespace domino
