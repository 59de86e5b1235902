#include "bba/defense/defense.hpp"

#include <charconv>

#include "bba/craft/craft.hpp"
#include "bba/error.hpp"
#include "bba/nd/kernels.hpp"

namespace bba::defense {

void AdvTrainConfig::validate() const {
  if (!(train_epsilon > 0.0 && train_epsilon <= 1.0))
    throw ConfigError("adversarial_train: train_epsilon must be in (0, 1]");
  base.validate();
}

void DistillConfig::validate() const {
  if (temperature < 1.0) throw ConfigError("distill: temperature must be >= 1");
  base.validate();
}

std::unique_ptr<Classifier> adversarial_train(const models::ArchitectureSpec& arch,
                                              const data::LabeledDataset& ds,
                                              const AdvTrainConfig& cfg) {
  cfg.validate();
  if (ds.size() == 0) throw ContractViolation("adversarial_train: empty dataset");
  const auto& k = nd::kern::kernels();
  models::Network net(arch);
  net.init_params(cfg.base.rng.child(0));
  models::TrainingConfig inner = cfg.base;
  inner.rng = cfg.base.rng.child(1);
  models::SgdTrainer trainer(net, inner);

  std::vector<const Vec*> bx;
  std::vector<int> by;
  std::vector<Vec> adv;
  std::vector<const Vec*> adv_ptr;
  models::Network::Trace t;
  for (int e = 0; e < inner.epochs; ++e) {
    trainer.begin_epoch(e);
    for (const auto& batch : trainer.make_batches(ds.size())) {
      bx.clear();
      by.clear();
      for (std::size_t i : batch) {
        bx.push_back(&ds.inputs[i]);
        by.push_back(ds.labels[i]);
      }
      trainer.train_batch(bx, by);

      // FGSM batch against the parameters we just stepped, true labels.
      adv.clear();
      adv_ptr.clear();
      for (std::size_t s = 0; s < bx.size(); ++s) {
        const Vec& x = *bx[s];
        Vec g = net.input_cost_gradient(x, by[s]);
        Vec xs(x.size());
        k.sgn(g.data(), xs.data(), xs.size());
        k.scale(cfg.train_epsilon, xs.data(), xs.data(), xs.size());
        k.add(x.data(), xs.data(), xs.data(), xs.size());
        nd::clamp01_inplace(xs);
        adv.push_back(std::move(xs));
      }
      for (const Vec& v : adv) adv_ptr.push_back(&v);
      trainer.train_batch(adv_ptr, by);
    }
  }
  return std::make_unique<models::NetworkClassifier>(std::move(net));
}

std::unique_ptr<Classifier> distill_train(const models::ArchitectureSpec& arch,
                                          const data::LabeledDataset& ds,
                                          const DistillConfig& cfg) {
  cfg.validate();
  if (ds.size() == 0) throw ContractViolation("distill: empty dataset");

  // Both networks are optimized in temperature-reparameterized coordinates
  // V = W_head / T: training V at temperature T is step-for-step identical
  // to plain T=1 training (same forward probabilities, same updates), and
  // the deployed temperature-T model is V's network with the softmax head's
  // dense layer scaled back by T. This keeps the optimizer stable at any T
  // while the deployed logits carry the full temperature factor.

  // Teacher at temperature T (V-form): plain training on hard labels.
  models::Network teacher(arch);
  teacher.init_params(cfg.base.rng.child(0));
  {
    models::TrainingConfig inner = cfg.base;
    inner.rng = cfg.base.rng.child(1);
    models::SgdTrainer trainer(teacher, inner);
    trainer.run(ds.inputs, ds.labels);
  }

  // The teacher's temperature-T soft labels: softmax(z/T) with z = T*V*a.
  std::vector<Vec> soft;
  soft.reserve(ds.size());
  for (const Vec& x : ds.inputs) soft.push_back(teacher.forward(x));

  // Student at temperature T (V-form): fits the soft labels.
  models::Network student(arch);
  student.init_params(cfg.base.rng.child(2));
  {
    models::TrainingConfig inner = cfg.base;
    inner.rng = cfg.base.rng.child(3);
    models::SgdTrainer trainer(student, inner);
    std::vector<const Vec*> bx, bt;
    for (int e = 0; e < inner.epochs; ++e) {
      trainer.begin_epoch(e);
      for (const auto& batch : trainer.make_batches(ds.size())) {
        bx.clear();
        bt.clear();
        for (std::size_t i : batch) {
          bx.push_back(&ds.inputs[i]);
          bt.push_back(&soft[i]);
        }
        trainer.train_batch_soft(bx, bt);
      }
    }
  }

  // Deploy at T = 1: restore W_head = T * V_head.
  auto& w = student.weights().back();
  for (double& v : w.data()) v *= cfg.temperature;
  for (double& v : student.biases().back()) v *= cfg.temperature;
  student.set_temperature(1.0);
  return std::make_unique<models::NetworkClassifier>(std::move(student));
}

std::vector<DefenseReport> evaluate_defense(const Classifier& oracle_model,
                                            const Classifier& substitute,
                                            const data::LabeledDataset& test,
                                            std::span<const double> eps_list) {
  if (oracle_model.n_classes() != substitute.n_classes() ||
      oracle_model.in_dim() != substitute.in_dim())
    throw DimensionError("evaluate_defense: oracle/substitute shape mismatch");
  std::vector<DefenseReport> out;
  for (const double eps : eps_list) {
    DefenseReport row;
    row.eps = eps;
    std::size_t oo = 0, ss = 0, so = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const Vec& x = test.inputs[i];
      const int truth = test.labels[i];
      const int oracle_view = oracle_model.predict_label(x);
      // White-box baseline: the oracle's own gradients at its own label.
      const auto direct = craft::fgsm(oracle_model, x, oracle_view, eps, truth);
      if (oracle_model.predict_label(direct.x_star) != truth) ++oo;
      // Black-box: substitute gradients at the oracle's label for x.
      const auto transfer = craft::fgsm(substitute, x, oracle_view, eps, truth);
      if (transfer.substitute_label != truth) ++ss;
      if (oracle_model.predict_label(transfer.x_star) != truth) ++so;
    }
    const double n = static_cast<double>(test.size());
    row.o_to_o = oo / n;
    row.s_to_s = ss / n;
    row.s_to_o = so / n;
    out.push_back(row);
  }
  return out;
}

std::string defense_csv(std::span<const DefenseReport> rows, const std::string& tag) {
  std::string out = "tag,attack_eps,o_to_o,s_to_s,s_to_o\n";
  char buf[64];
  auto put = [&](double v) {
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, r.ptr);
  };
  for (const DefenseReport& r : rows) {
    out += tag;
    out += ',';
    put(r.eps);
    out += ',';
    put(r.o_to_o);
    out += ',';
    put(r.s_to_s);
    out += ',';
    put(r.s_to_o);
    out += '\n';
  }
  return out;
}

}  // namespace bba::defense
