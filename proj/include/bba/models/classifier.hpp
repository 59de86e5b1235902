#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "bba/models/network.hpp"
#include "bba/nd/mat.hpp"

namespace bba::models {

enum class ClassifierKind : int {
  Network = 0,
  LogisticRegression = 1,
  LinearSvm = 2,
  DecisionTree = 3,
  Knn = 4,
};

const char* to_string(ClassifierKind k);

/// A trained model producing probability vectors. Immutable after training;
/// safe to evaluate from any number of threads. Only the differentiable
/// kinds (Network, LogisticRegression) expose cost gradients and Jacobians.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ClassifierKind kind() const = 0;
  virtual int in_dim() const = 0;
  virtual int n_classes() const = 0;

  /// Probability vector of length n_classes (non-negative, sums to 1).
  virtual Vec forward(std::span<const double> x) const = 0;
  /// argmax of forward() with lowest-index tie-break.
  int predict_label(std::span<const double> x) const;

  virtual bool differentiable() const { return false; }
  virtual double cost(std::span<const double> x, int y) const;
  virtual Vec input_cost_gradient(std::span<const double> x, int y) const;
  virtual Mat jacobian(std::span<const double> x) const;

  virtual void save(std::ostream& out) const = 0;
  static std::unique_ptr<Classifier> load(std::istream& in);
};

void save_classifier(const Classifier& c, const std::string& path);
std::unique_ptr<Classifier> load_classifier(const std::string& path);

class NetworkClassifier : public Classifier {
 public:
  explicit NetworkClassifier(Network net) : net_(std::move(net)) {}

  ClassifierKind kind() const override { return ClassifierKind::Network; }
  int in_dim() const override { return net_.in_dim(); }
  int n_classes() const override { return net_.out_dim(); }
  Vec forward(std::span<const double> x) const override { return net_.forward(x); }
  bool differentiable() const override { return true; }
  double cost(std::span<const double> x, int y) const override { return net_.cost(x, y); }
  Vec input_cost_gradient(std::span<const double> x, int y) const override {
    return net_.input_cost_gradient(x, y);
  }
  Mat jacobian(std::span<const double> x) const override { return net_.jacobian(x); }
  void save(std::ostream& out) const override;

  Network& network() { return net_; }
  const Network& network() const { return net_; }

 private:
  Network net_;
};

/// Multinomial logistic regression: a single dense + softmax stack sharing
/// the network engine, kept as its own kind for serialization and reporting.
class LogisticClassifier : public NetworkClassifier {
 public:
  using NetworkClassifier::NetworkClassifier;
  ClassifierKind kind() const override { return ClassifierKind::LogisticRegression; }
  void save(std::ostream& out) const override;
};

/// Linear one-vs-rest SVM; forward() softmaxes the margins into a
/// probability vector. Oracle-only kind (no gradients exposed).
class SvmClassifier : public Classifier {
 public:
  SvmClassifier(Mat w, Vec b) : w_(std::move(w)), b_(std::move(b)) {}

  ClassifierKind kind() const override { return ClassifierKind::LinearSvm; }
  int in_dim() const override { return static_cast<int>(w_.cols()); }
  int n_classes() const override { return static_cast<int>(w_.rows()); }
  Vec forward(std::span<const double> x) const override;
  void save(std::ostream& out) const override;

  const Mat& weights() const { return w_; }
  const Vec& bias() const { return b_; }

 private:
  Mat w_;  // one row of weights per class
  Vec b_;
};

class TreeClassifier : public Classifier {
 public:
  struct Node {
    int feature = -1;       // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    Vec dist;               // leaf class distribution
  };

  TreeClassifier(std::vector<Node> nodes, int in_dim, int classes)
      : nodes_(std::move(nodes)), in_dim_(in_dim), classes_(classes) {}

  ClassifierKind kind() const override { return ClassifierKind::DecisionTree; }
  int in_dim() const override { return in_dim_; }
  int n_classes() const override { return classes_; }
  Vec forward(std::span<const double> x) const override;
  void save(std::ostream& out) const override;

  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::vector<Node> nodes_;
  int in_dim_ = 0;
  int classes_ = 0;
};

class KnnClassifier : public Classifier {
 public:
  KnnClassifier(std::vector<Vec> xs, std::vector<int> ys, int k, int classes)
      : xs_(std::move(xs)), ys_(std::move(ys)), k_(k), classes_(classes) {}

  ClassifierKind kind() const override { return ClassifierKind::Knn; }
  int in_dim() const override { return xs_.empty() ? 0 : static_cast<int>(xs_[0].size()); }
  int n_classes() const override { return classes_; }
  Vec forward(std::span<const double> x) const override;
  void save(std::ostream& out) const override;

  int k() const { return k_; }

 private:
  std::vector<Vec> xs_;
  std::vector<int> ys_;
  int k_ = 3;
  int classes_ = 0;
};

}  // namespace bba::models
