#include "bba/models/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bba/error.hpp"
#include "bba/nd/kernels.hpp"

namespace bba::models {

void TrainingConfig::validate() const {
  if (epochs < 0) throw ConfigError("training: epochs must be >= 0");
  if (learning_rate <= 0) throw ConfigError("training: learning_rate must be > 0");
  if (momentum < 0 || momentum >= 1) throw ConfigError("training: momentum in [0,1)");
  if (batch_size <= 0) throw ConfigError("training: batch_size must be > 0");
}

SgdTrainer::SgdTrainer(Network& net, TrainingConfig cfg)
    : net_(net), cfg_(std::move(cfg)), lr_(cfg_.learning_rate), mom_(cfg_.momentum) {
  cfg_.validate();
  vel_ = net_.zero_grads();
}

void SgdTrainer::begin_epoch(int epoch) {
  if (epoch > 0 && cfg_.decay_every > 0 && epoch % cfg_.decay_every == 0) {
    lr_ *= cfg_.decay_factor;
    mom_ *= cfg_.decay_factor;
  }
}

std::vector<std::vector<std::size_t>> SgdTrainer::make_batches(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = cfg_.rng.below(i);
    std::swap(idx[i - 1], idx[j]);
  }
  std::vector<std::vector<std::size_t>> batches;
  const std::size_t bs = static_cast<std::size_t>(cfg_.batch_size);
  for (std::size_t at = 0; at < n; at += bs) {
    const std::size_t end = std::min(n, at + bs);
    batches.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(at),
                         idx.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

// Training at temperature T scales the cross-entropy by T, i.e. the seed at
// the softmax input is (p - target) with no 1/T factor: the optimizer recipe
// stays temperature-invariant. Deployed-model cost/gradient queries keep the
// exact unscaled chain rule.

void SgdTrainer::train_batch(std::span<const Vec* const> xs, std::span<const int> ys) {
  Network::Grads g = net_.zero_grads();
  Network::Trace t;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    net_.forward_trace(*xs[s], t);
    Vec dz = t.out.back();
    dz[static_cast<std::size_t>(ys[s])] -= 1.0;
    net_.backward_from_softmax_input(t, std::move(dz), &g, false);
  }
  apply(g, static_cast<double>(xs.size()));
}

void SgdTrainer::train_batch_soft(std::span<const Vec* const> xs,
                                  std::span<const Vec* const> targets) {
  Network::Grads g = net_.zero_grads();
  Network::Trace t;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    net_.forward_trace(*xs[s], t);
    Vec dz = t.out.back();
    const Vec& target = *targets[s];
    for (std::size_t i = 0; i < dz.size(); ++i) dz[i] -= target[i];
    net_.backward_from_softmax_input(t, std::move(dz), &g, false);
  }
  apply(g, static_cast<double>(xs.size()));
}

void SgdTrainer::apply(const Network::Grads& g, double batch_n) {
  const auto& k = nd::kern::kernels();
  const double step = -lr_ / batch_n;
  for (std::size_t p = 0; p < vel_.w.size(); ++p) {
    auto& vw = vel_.w[p].data();
    k.scale(mom_, vw.data(), vw.data(), vw.size());
    k.axpy(step, g.w[p].data().data(), vw.data(), vw.size());
    auto& w = net_.weights()[p].data();
    k.add(w.data(), vw.data(), w.data(), w.size());

    auto& vb = vel_.b[p];
    k.scale(mom_, vb.data(), vb.data(), vb.size());
    k.axpy(step, g.b[p].data(), vb.data(), vb.size());
    auto& b = net_.biases()[p];
    k.add(b.data(), vb.data(), b.data(), b.size());
  }
}

void SgdTrainer::run(const std::vector<Vec>& xs, const std::vector<int>& ys) {
  std::vector<const Vec*> bx;
  std::vector<int> by;
  for (int e = 0; e < cfg_.epochs; ++e) {
    begin_epoch(e);
    for (const auto& batch : make_batches(xs.size())) {
      bx.clear();
      by.clear();
      for (std::size_t i : batch) {
        bx.push_back(&xs[i]);
        by.push_back(ys[i]);
      }
      train_batch(bx, by);
    }
  }
}

std::unique_ptr<Classifier> train_network(const ArchitectureSpec& arch,
                                          const data::LabeledDataset& ds,
                                          const TrainingConfig& cfg) {
  if (ds.size() == 0) throw ContractViolation("train: empty dataset");
  for (int l : ds.labels)
    if (l < 0 || l >= arch.out_dim) throw ContractViolation("train: label out of range");
  Network net(arch);
  net.init_params(cfg.rng.child(0));
  TrainingConfig inner = cfg;
  inner.rng = cfg.rng.child(1);
  SgdTrainer trainer(net, inner);
  trainer.run(ds.inputs, ds.labels);
  return std::make_unique<NetworkClassifier>(std::move(net));
}

std::unique_ptr<Classifier> train_logistic(const data::LabeledDataset& ds,
                                           const TrainingConfig& cfg) {
  if (ds.size() == 0) throw ContractViolation("train: empty dataset");
  Network net(logistic_architecture(ds.dim(), ds.classes));
  net.init_params(cfg.rng.child(0));
  TrainingConfig inner = cfg;
  inner.rng = cfg.rng.child(1);
  SgdTrainer trainer(net, inner);
  trainer.run(ds.inputs, ds.labels);
  return std::make_unique<LogisticClassifier>(std::move(net));
}

std::unique_ptr<Classifier> train_linear_svm(const data::LabeledDataset& ds,
                                             const TrainingConfig& cfg, double l2) {
  if (ds.size() == 0) throw ContractViolation("train: empty dataset");
  cfg.validate();
  const auto& k = nd::kern::kernels();
  const std::size_t m = static_cast<std::size_t>(ds.dim());
  const std::size_t n_cls = static_cast<std::size_t>(ds.classes);
  Mat w(n_cls, m);
  Vec b(n_cls, 0.0);
  Mat vw(n_cls, m);
  Vec vb(n_cls, 0.0);
  nd::SeededRng rng = cfg.rng.child(2);
  double lr = cfg.learning_rate;
  double mom = cfg.momentum;

  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  Mat gw(n_cls, m);
  Vec gb(n_cls, 0.0);
  for (int e = 0; e < cfg.epochs; ++e) {
    if (e > 0 && cfg.decay_every > 0 && e % cfg.decay_every == 0) {
      lr *= cfg.decay_factor;
      mom *= cfg.decay_factor;
    }
    for (std::size_t i = ds.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
    for (std::size_t at = 0; at < ds.size(); at += bs) {
      const std::size_t end = std::min(ds.size(), at + bs);
      std::fill(gw.data().begin(), gw.data().end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (std::size_t s = at; s < end; ++s) {
        const Vec& x = ds.inputs[idx[s]];
        const int y = ds.labels[idx[s]];
        for (std::size_t c = 0; c < n_cls; ++c) {
          const double t = static_cast<int>(c) == y ? 1.0 : -1.0;
          const double margin = t * (k.dot(w.row(c), x.data(), m) + b[c]);
          if (margin < 1.0) {
            k.axpy(-t, x.data(), gw.row(c), m);
            gb[c] -= t;
          }
        }
      }
      const double inv = 1.0 / static_cast<double>(end - at);
      for (std::size_t c = 0; c < n_cls; ++c) {
        // hinge subgradient mean + L2 term
        k.scale(inv, gw.row(c), gw.row(c), m);
        k.axpy(l2, w.row(c), gw.row(c), m);
        k.scale(mom, vw.row(c), vw.row(c), m);
        k.axpy(-lr, gw.row(c), vw.row(c), m);
        k.add(w.row(c), vw.row(c), w.row(c), m);
        vb[c] = mom * vb[c] - lr * inv * gb[c];
        b[c] += vb[c];
      }
    }
  }
  return std::make_unique<SvmClassifier>(std::move(w), std::move(b));
}

namespace {

double gini(const std::vector<int>& counts, int total) {
  if (total == 0) return 0.0;
  double acc = 1.0;
  for (int c : counts) {
    const double p = static_cast<double>(c) / total;
    acc -= p * p;
  }
  return acc;
}

struct TreeBuilder {
  const data::LabeledDataset& ds;
  TreeConfig cfg;
  std::vector<TreeClassifier::Node> nodes;

  int build(std::vector<std::size_t>& samples, int depth) {
    std::vector<int> counts(static_cast<std::size_t>(ds.classes), 0);
    for (std::size_t s : samples) counts[static_cast<std::size_t>(ds.labels[s])]++;
    const int total = static_cast<int>(samples.size());
    const bool pure =
        std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = gini(counts, total);
    if (!pure && depth < cfg.max_depth && total >= 2 * cfg.min_leaf) {
      std::vector<std::pair<double, int>> vals(samples.size());
      for (int f = 0; f < ds.dim(); ++f) {
        for (std::size_t i = 0; i < samples.size(); ++i)
          vals[i] = {ds.inputs[samples[i]][static_cast<std::size_t>(f)],
                     ds.labels[samples[i]]};
        std::sort(vals.begin(), vals.end());
        std::vector<int> left(static_cast<std::size_t>(ds.classes), 0);
        std::vector<int> right = counts;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
          left[static_cast<std::size_t>(vals[i].second)]++;
          right[static_cast<std::size_t>(vals[i].second)]--;
          if (vals[i].first == vals[i + 1].first) continue;  // threshold between distinct values
          const int nl = static_cast<int>(i) + 1;
          const int nr = total - nl;
          if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
          const double score =
              (nl * gini(left, nl) + nr * gini(right, nr)) / static_cast<double>(total);
          if (score + 1e-12 < best_score) {
            best_score = score;
            best_feature = f;
            best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
          }
        }
      }
    }

    const int me = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (best_feature < 0) {
      Vec dist(static_cast<std::size_t>(ds.classes), 0.0);
      for (std::size_t c = 0; c < dist.size(); ++c)
        dist[c] = total > 0 ? static_cast<double>(counts[c]) / total : 0.0;
      nodes[static_cast<std::size_t>(me)].dist = std::move(dist);
      return me;
    }
    std::vector<std::size_t> ls, rs;
    for (std::size_t s : samples) {
      if (ds.inputs[s][static_cast<std::size_t>(best_feature)] <= best_threshold)
        ls.push_back(s);
      else
        rs.push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();
    const int left = build(ls, depth + 1);
    const int right = build(rs, depth + 1);
    nodes[static_cast<std::size_t>(me)].feature = best_feature;
    nodes[static_cast<std::size_t>(me)].threshold = best_threshold;
    nodes[static_cast<std::size_t>(me)].left = left;
    nodes[static_cast<std::size_t>(me)].right = right;
    return me;
  }
};

}  // namespace

std::unique_ptr<Classifier> train_decision_tree(const data::LabeledDataset& ds,
                                                const TreeConfig& cfg) {
  if (ds.size() == 0) throw ContractViolation("train: empty dataset");
  TreeBuilder builder{ds, cfg, {}};
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  builder.build(all, 0);
  return std::make_unique<TreeClassifier>(std::move(builder.nodes), ds.dim(), ds.classes);
}

std::unique_ptr<Classifier> train_knn(const data::LabeledDataset& ds, int k) {
  if (ds.size() == 0) throw ContractViolation("train: empty dataset");
  if (k < 1) throw ConfigError("knn: k must be >= 1");
  return std::make_unique<KnnClassifier>(ds.inputs, ds.labels, k, ds.classes);
}

double mean_cost(const Classifier& c, const data::LabeledDataset& ds) {
  if (ds.size() == 0) throw ContractViolation("mean_cost: empty dataset");
  double acc = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) acc += c.cost(ds.inputs[i], ds.labels[i]);
  return acc / static_cast<double>(ds.size());
}

double accuracy(const Classifier& c, const data::LabeledDataset& ds) {
  if (ds.size() == 0) throw ContractViolation("accuracy: empty dataset");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (c.predict_label(ds.inputs[i]) == ds.labels[i]) ++hit;
  return static_cast<double>(hit) / static_cast<double>(ds.size());
}

}  // namespace bba::models
