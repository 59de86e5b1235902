#include "bba/models/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "bba/error.hpp"
#include "bba/nd/kernels.hpp"

namespace bba::models {

const char* to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Network: return "network";
    case ClassifierKind::LogisticRegression: return "logistic";
    case ClassifierKind::LinearSvm: return "svm";
    case ClassifierKind::DecisionTree: return "tree";
    case ClassifierKind::Knn: return "knn";
  }
  return "?";
}

int Classifier::predict_label(std::span<const double> x) const {
  const Vec p = forward(x);
  return static_cast<int>(nd::argmax(p));
}

double Classifier::cost(std::span<const double>, int) const {
  throw UnsupportedOperation(std::string("cost: unsupported for ") + to_string(kind()));
}

Vec Classifier::input_cost_gradient(std::span<const double>, int) const {
  throw UnsupportedOperation(std::string("input_cost_gradient: unsupported for ") +
                             to_string(kind()));
}

Mat Classifier::jacobian(std::span<const double>) const {
  throw UnsupportedOperation(std::string("jacobian: unsupported for ") + to_string(kind()));
}

Vec SvmClassifier::forward(std::span<const double> x) const {
  if (x.size() != w_.cols()) throw DimensionError("svm: input dimension mismatch");
  Vec scores = nd::matvec(w_, x);
  const auto& k = nd::kern::kernels();
  k.add(scores.data(), b_.data(), scores.data(), scores.size());
  nd::softmax_inplace(scores);
  return scores;
}

Vec TreeClassifier::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != in_dim_) throw DimensionError("tree: input dimension mismatch");
  int n = 0;
  while (nodes_[static_cast<std::size_t>(n)].feature >= 0) {
    const Node& node = nodes_[static_cast<std::size_t>(n)];
    n = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes_[static_cast<std::size_t>(n)].dist;
}

Vec KnnClassifier::forward(std::span<const double> x) const {
  if (xs_.empty()) throw ContractViolation("knn: empty training set");
  if (x.size() != xs_[0].size()) throw DimensionError("knn: input dimension mismatch");
  const int k = std::min<int>(k_, static_cast<int>(xs_.size()));
  // Keep the k smallest squared distances, earliest index wins ties.
  std::vector<std::pair<double, int>> best;
  best.reserve(static_cast<std::size_t>(k) + 1);
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    double d2 = 0.0;
    const double* a = xs_[i].data();
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = a[j] - x[j];
      d2 += diff * diff;
    }
    if (static_cast<int>(best.size()) < k) {
      best.emplace_back(d2, static_cast<int>(i));
      std::push_heap(best.begin(), best.end());
    } else if (d2 < best.front().first) {
      std::pop_heap(best.begin(), best.end());
      best.back() = {d2, static_cast<int>(i)};
      std::push_heap(best.begin(), best.end());
    }
  }
  Vec votes(static_cast<std::size_t>(classes_), 0.0);
  for (const auto& [d2, idx] : best)
    votes[static_cast<std::size_t>(ys_[static_cast<std::size_t>(idx)])] += 1.0;
  for (double& v : votes) v /= static_cast<double>(best.size());
  return votes;
}

}  // namespace bba::models
