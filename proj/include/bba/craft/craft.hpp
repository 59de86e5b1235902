#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bba/models/classifier.hpp"
#include "bba/nd/mat.hpp"

namespace bba::craft {

using models::Classifier;
using nd::Mat;
using nd::Vec;

struct FgsmConfig {
  double epsilon = 0.3;  // input variation, (0, 1]
  void validate() const;
};

struct JsmaConfig {
  double upsilon = 0.14;  // maximum distortion: fraction of components
  double epsilon = 1.0;   // per-component variation
  int target = 0;         // adversarial target class
  void validate(int classes) const;
};

struct AdversarialRecord {
  Vec x;
  Vec x_star;
  Vec delta;  // x_star - x, exact
  int source_label = -1;      // label misclassification is judged against
  int substitute_label = -1;  // substitute verdict on x_star
  int oracle_label = -1;      // oracle verdict on x_star (-1 until queried)
  int components_changed = 0;
  bool saliency_exhausted = false;
};

/// Fast gradient sign method: x* = clamp01(x + eps * sgn(grad_x cost(F,x,y))).
/// y_grad is the label the gradient is taken at (the oracle's label under
/// the black-box discipline); source_label defaults to y_grad.
AdversarialRecord fgsm(const Classifier& f, const Vec& x, int y_grad, double eps,
                       std::optional<int> source_label = {});

/// Adversarial saliency of each input component for target class t, from
/// the N x M Jacobian at x. Zero where the target derivative is negative or
/// the other-class derivative sum is positive; else their product with the
/// sum's magnitude.
Vec saliency(const Mat& jacobian, int t);

/// Feature-increasing saliency-map attack: repeatedly bump the unperturbed
/// component of maximal saliency by eps (clamping to [0,1]) until
/// ceil(upsilon * M) distinct components were changed. Does not stop early
/// on success. When every eligible component has zero saliency the record
/// comes back flagged saliency_exhausted with the work done so far.
AdversarialRecord jsma(const Classifier& f, const Vec& x, const JsmaConfig& cfg,
                       std::optional<int> source_label = {});

/// L1 perturbation budget: eps * (fraction of components changed).
double l1_budget(double eps, double changed_fraction);

/// Adversarial batch container (binary, bit-exact round trip).
void save_records(std::span<const AdversarialRecord> records, const std::string& config_echo,
                  const std::string& path);
struct RecordBatch {
  std::vector<AdversarialRecord> records;
  std::string config_echo;
};
RecordBatch load_records(const std::string& path);

}  // namespace bba::craft
