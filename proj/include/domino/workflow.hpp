#pragma once

#include <span>
#include <string>
#include <vector>

#include "domino/metrics.hpp"
#include "domino/model.hpp"
#include "domino/penalty.hpp"
#include "domino/phantom.hpp"

namespace domino {

/// Predicts every sample and evaluates against its truth. Adds a warning
/// when the model's recorded training set is the one being evaluated.
EvalReport evaluate_model(const PatchClassifier& model, std::span<const PhantomSample> data,
                          const ClassSet& classes, const GroupMap* group_map = nullptr,
                          const EvalOptions& options = {});

struct CmTraining {
  TrainResult base;
  ConfusionMatrix confusion;  // base model on the held-out set
  PenaltyMatrix penalty;
  TrainResult regularized;
  std::vector<std::string> warnings;
};

/// Train base -> confusion on held-out -> W = build_cm_penalty(C, cfg.scale)
/// -> retrain from the same fresh initialization with W.
CmTraining train_cm(std::span<const PhantomSample> train_set,
                    std::span<const PhantomSample> heldout_set, std::size_t num_classes,
                    const TrainConfig& cfg);

struct WorkflowResult : CmTraining {
  EvalReport base_report;  // both reports are on the test set
  EvalReport regularized_report;
};

/// train_cm followed by evaluation of both models on the test set.
WorkflowResult domino_cm_workflow(std::span<const PhantomSample> train_set,
                                  std::span<const PhantomSample> heldout_set,
                                  std::span<const PhantomSample> test_set,
                                  const ClassSet& classes, const TrainConfig& cfg,
                                  const GroupMap* group_map = nullptr,
                                  const EvalOptions& options = {});

ConfusionMatrix confusion_on(const PatchClassifier& model, std::span<const PhantomSample> data);

}  // namespace domino
