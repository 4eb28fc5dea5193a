#pragma once

#include <span>
#include <vector>

#include "domino/core.hpp"
#include "domino/penalty.hpp"

namespace domino {

inline constexpr double kDefaultDiceEpsilon = 1e-5;

struct LossConfig {
  double beta = 0.0;         // regularizer weight, must lie in [0,1]
  double lambda_ce = 1.0;
  double lambda_dice = 1.0;
  double epsilon = kDefaultDiceEpsilon;  // soft Dice smoothing and log guard

  void validate() const;
};

struct LossTerms {
  double cross_entropy = 0.0;
  double soft_dice = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

struct LossAndGrad {
  LossTerms terms;
  LogitMap grad;  // d(total)/d(logit), same layout as the input logits
};

/// Numerically stable softmax of each pixel's logits.
ProbMap softmax_map(const LogitMap& z);

/// In-place softmax of one vector (max-subtracted).
void softmax_inplace(std::span<double> v);

/// Mean over pixels of -log(p[true] + epsilon).
double cross_entropy(const ProbMap& p, const LabelMap& t,
                     double epsilon = kDefaultDiceEpsilon);

/// 1 - mean over classes of (2 sum p*y + eps) / (sum p + sum y + eps).
/// A class with zero denominator (eps = 0, absent everywhere) scores 1.
double soft_dice_loss(const ProbMap& p, const LabelMap& t,
                      double epsilon = kDefaultDiceEpsilon);

/// Mean over pixels of sum_j w[true][j] * p_j; beta is applied by the caller.
double domino_penalty(const ProbMap& p, const LabelMap& t, const PenaltyMatrix& w);

/// lambda_ce*CE + lambda_dice*softDice + beta*penalty on softmax(z), with the
/// exact gradient with respect to every logit.
LossAndGrad total_loss_and_grad(const LogitMap& z, const LabelMap& t,
                                const PenaltyMatrix& w, const LossConfig& cfg);

namespace detail {

// Shared kernel: `probs` holds softmax outputs (pixels x classes). Writes
// d(total)/d(logit) into `grad` (same size) and returns the loss terms.
LossTerms loss_grad_from_probs(std::span<const double> probs, const LabelMap& t,
                               const PenaltyMatrix& w, const LossConfig& cfg,
                               std::span<double> grad);

}  // namespace detail

}  // namespace domino
