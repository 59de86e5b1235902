#pragma once

#include <memory>
#include <span>
#include <vector>

#include "bba/data/dataset.hpp"
#include "bba/models/train.hpp"

namespace bba::defense {

using models::Classifier;
using nd::Vec;

struct AdvTrainConfig {
  double train_epsilon = 0.3;
  models::TrainingConfig base;
  void validate() const;
};

/// Adversarial training: after every clean batch update, craft FGSM
/// examples for that batch against the current parameters (true labels,
/// eps = train_epsilon) and take a training step on them too.
std::unique_ptr<Classifier> adversarial_train(const models::ArchitectureSpec& arch,
                                              const data::LabeledDataset& ds,
                                              const AdvTrainConfig& cfg);

struct DistillConfig {
  double temperature = 100.0;
  models::TrainingConfig base;  // recipe for both teacher and student
  void validate() const;
};

/// Defensive distillation: teacher trained at temperature T on hard labels,
/// student trained at T on the teacher's temperature-T soft labels, student
/// deployed with its softmax back at temperature 1.
std::unique_ptr<Classifier> distill_train(const models::ArchitectureSpec& arch,
                                          const data::LabeledDataset& ds,
                                          const DistillConfig& cfg);

struct DefenseReport {
  double eps = 0.0;
  double o_to_o = 0.0;  // white-box FGSM on the oracle, vs the oracle
  double s_to_s = 0.0;  // substitute-crafted, vs the substitute
  double s_to_o = 0.0;  // substitute-crafted, vs the oracle
};

/// Misclassification rates over the same sample set for each eps. Gradient
/// labels are each model's own prediction; rates are judged against the
/// dataset's labels.
std::vector<DefenseReport> evaluate_defense(const Classifier& oracle_model,
                                            const Classifier& substitute,
                                            const data::LabeledDataset& test,
                                            std::span<const double> eps_list);

std::string defense_csv(std::span<const DefenseReport> rows, const std::string& tag);

}  // namespace bba::defense
