#include "domino/workflow.hpp"

namespace domino {

EvalReport evaluate_model(const PatchClassifier& model, std::span<const PhantomSample> data,
                          const ClassSet& classes, const GroupMap* group_map,
                          const EvalOptions& options) {
  if (model.shape.num_classes != classes.size()) {
    fail(ErrorKind::Shape, "model predicts " + std::to_string(model.shape.num_classes) +
                               " classes but the class set has " +
                               std::to_string(classes.size()));
  }
  std::vector<ProbMap> preds;
  std::vector<LabelMap> truths;
  for (const auto& s : data) {
    if (s.truth.num_classes() != classes.size()) {
      fail(ErrorKind::Shape, "dataset class count differs from the model's");
    }
    preds.push_back(predict(model, s.image));
    truths.push_back(s.truth);
  }
  EvalReport report = evaluate(preds, truths, classes, group_map, options);
  if (model.trained_on != 0 && model.trained_on == fingerprint(data)) {
    report.warnings.push_back(
        "evaluation data is the model's training set; metrics are not held-out estimates");
  }
  return report;
}

ConfusionMatrix confusion_on(const PatchClassifier& model, std::span<const PhantomSample> data) {
  std::vector<LabelMap> truths, preds;
  for (const auto& s : data) {
    truths.push_back(s.truth);
    preds.push_back(argmax_map(predict(model, s.image)));
  }
  return confusion_from_predictions(truths, preds);
}

CmTraining train_cm(std::span<const PhantomSample> train_set,
                    std::span<const PhantomSample> heldout_set, std::size_t num_classes,
                    const TrainConfig& cfg) {
  if (heldout_set.empty()) fail(ErrorKind::Argument, "held-out set is empty");
  CmTraining r;
  if (fingerprint(train_set) == fingerprint(heldout_set)) {
    r.warnings.push_back(
        "held-out set is identical to the training set; the confusion matrix will be optimistic");
  }
  r.base = train(train_set, num_classes, cfg);
  r.confusion = confusion_on(r.base.model, heldout_set);
  r.penalty = build_cm_penalty(r.confusion, cfg.scale);
  r.regularized = train(train_set, num_classes, cfg, &r.penalty);
  return r;
}

WorkflowResult domino_cm_workflow(std::span<const PhantomSample> train_set,
                                  std::span<const PhantomSample> heldout_set,
                                  std::span<const PhantomSample> test_set,
                                  const ClassSet& classes, const TrainConfig& cfg,
                                  const GroupMap* group_map, const EvalOptions& options) {
  if (test_set.empty()) fail(ErrorKind::Argument, "test set is empty");
  WorkflowResult r;
  static_cast<CmTraining&>(r) = train_cm(train_set, heldout_set, classes.size(), cfg);
  r.base_report = evaluate_model(r.base.model, test_set, classes, group_map, options);
  r.regularized_report = evaluate_model(r.regularized.model, test_set, classes, group_map, options);
  return r;
}

}  // namespace domino
