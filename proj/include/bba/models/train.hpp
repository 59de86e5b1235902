#pragma once

#include <memory>

#include "bba/data/dataset.hpp"
#include "bba/models/classifier.hpp"
#include "bba/nd/rng.hpp"

namespace bba::models {

/// Mini-batch SGD recipe. Defaults follow the oracle recipe: lr 1e-2,
/// momentum 0.9, both decayed by 0.5 every 10 epochs.
struct TrainingConfig {
  int epochs = 10;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  double decay_factor = 0.5;
  int decay_every = 10;
  int batch_size = 32;
  nd::SeededRng rng{1};

  void validate() const;
};

/// Momentum SGD over a Network. The fine-grained batch interface exists for
/// the defense recipes (interleaved adversarial batches, soft-label
/// distillation); train_network drives it for the plain case.
class SgdTrainer {
 public:
  SgdTrainer(Network& net, TrainingConfig cfg);

  /// Applies the decay schedule; call once per epoch starting at 0.
  void begin_epoch(int epoch);

  void train_batch(std::span<const Vec* const> xs, std::span<const int> ys);
  /// Soft targets (probability vectors), cross-entropy gradient p - target.
  void train_batch_soft(std::span<const Vec* const> xs,
                        std::span<const Vec* const> targets);

  /// Shuffled index batches for one epoch, drawn from the trainer's rng.
  std::vector<std::vector<std::size_t>> make_batches(std::size_t n);

  /// Full run: epochs x shuffled batches over the dataset.
  void run(const std::vector<Vec>& xs, const std::vector<int>& ys);

 private:
  void apply(const Network::Grads& g, double batch_n);

  Network& net_;
  TrainingConfig cfg_;
  double lr_;
  double mom_;
  Network::Grads vel_;
};

std::unique_ptr<Classifier> train_network(const ArchitectureSpec& arch,
                                          const data::LabeledDataset& ds,
                                          const TrainingConfig& cfg);

std::unique_ptr<Classifier> train_logistic(const data::LabeledDataset& ds,
                                           const TrainingConfig& cfg);

std::unique_ptr<Classifier> train_linear_svm(const data::LabeledDataset& ds,
                                             const TrainingConfig& cfg,
                                             double l2 = 1e-4);

struct TreeConfig {
  int max_depth = 12;
  int min_leaf = 5;
};
std::unique_ptr<Classifier> train_decision_tree(const data::LabeledDataset& ds,
                                                const TreeConfig& cfg = {});

std::unique_ptr<Classifier> train_knn(const data::LabeledDataset& ds, int k = 3);

/// Mean cross-entropy of a differentiable model over a dataset.
double mean_cost(const Classifier& c, const data::LabeledDataset& ds);
/// Fraction of samples with predict_label == label.
double accuracy(const Classifier& c, const data::LabeledDataset& ds);

}  // namespace bba::models
