#pragma once

// Independent reference implementations used as test oracles. They are
// deliberately written the slow, obvious way and share no code with the
// library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "domino/core.hpp"

namespace oracle {

inline double hausdorff_directed(const std::vector<domino::Pixel>& a,
                                 const std::vector<domino::Pixel>& b, bool mean_of_min) {
  double acc = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) {
      const double dx = p.x - q.x, dy = p.y - q.y;
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    acc = mean_of_min ? acc + best : std::max(acc, best);
  }
  return mean_of_min ? acc / static_cast<double>(a.size()) : acc;
}

inline double hausdorff(const std::vector<domino::Pixel>& a, const std::vector<domino::Pixel>& b) {
  return std::max(hausdorff_directed(a, b, false), hausdorff_directed(b, a, false));
}

inline double modified_hausdorff(const std::vector<domino::Pixel>& a,
                                 const std::vector<domino::Pixel>& b) {
  return std::max(hausdorff_directed(a, b, true), hausdorff_directed(b, a, true));
}

struct LossWeights {
  double beta, lambda_ce, lambda_dice, eps;
};

// Total loss on raw logits, z laid out pixels x classes.
inline double total_loss(const std::vector<double>& z, const std::vector<int>& truth, int n,
                         const std::vector<std::vector<double>>& w, const LossWeights& c) {
  const int pixels = static_cast<int>(truth.size());
  std::vector<double> p(z.size());
  for (int i = 0; i < pixels; ++i) {
    double m = -1e300;
    for (int k = 0; k < n; ++k) m = std::max(m, z[i * n + k]);
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += std::exp(z[i * n + k] - m);
    for (int k = 0; k < n; ++k) p[i * n + k] = std::exp(z[i * n + k] - m) / s;
  }
  double ce = 0.0, pen = 0.0;
  for (int i = 0; i < pixels; ++i) {
    ce += -std::log(p[i * n + truth[i]] + c.eps);
    for (int k = 0; k < n; ++k) pen += w[truth[i]][k] * p[i * n + k];
  }
  ce /= pixels;
  pen /= pixels;
  double dice_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    double inter = 0.0, sp = 0.0, sy = 0.0;
    for (int i = 0; i < pixels; ++i) {
      const double y = truth[i] == k ? 1.0 : 0.0;
      inter += p[i * n + k] * y;
      sp += p[i * n + k];
      sy += y;
    }
    dice_sum += (2.0 * inter + c.eps) / (sp + sy + c.eps);
  }
  const double dice_loss = 1.0 - dice_sum / n;
  return c.lambda_ce * ce + c.lambda_dice * dice_loss + c.beta * pen;
}

}  // namespace oracle
