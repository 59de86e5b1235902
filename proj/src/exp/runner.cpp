#include "bba/exp/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>

#include "bba/analysis/metrics.hpp"
#include "bba/analysis/signstats.hpp"
#include "bba/craft/craft.hpp"
#include "bba/defense/defense.hpp"
#include "bba/error.hpp"
#include "bba/io/report.hpp"
#include "bba/substitute/substitute.hpp"

namespace bba::exp {

using io::format_double;
using nd::SeededRng;
using nd::Vec;
using nlohmann::json;

namespace {

// Stream ids under the master seed; one per independent random decision.
enum Stream : std::uint64_t {
  kDatasetStream = 0,
  kOracleStream = 1,
  kSeedSplitStream = 2,
  kSubstituteStream = 3,
  kDefenseStream = 4,
  kAnalyzeStream = 5,
};

models::TrainingConfig oracle_training(const io::OracleConfig& o, SeededRng rng) {
  models::TrainingConfig cfg;
  cfg.epochs = o.epochs;
  cfg.learning_rate = o.learning_rate;
  cfg.momentum = o.momentum;
  cfg.decay_factor = o.decay_factor;
  cfg.decay_every = o.decay_every;
  cfg.batch_size = o.batch_size;
  cfg.rng = rng;
  return cfg;
}

substitute::SubstituteConfig substitute_config(const io::ExperimentConfig& cfg,
                                               const data::LabeledDataset& shape_like) {
  substitute::SubstituteConfig s;
  s.model.logistic = cfg.substitute.kind == "logistic";
  if (!s.model.logistic)
    s.model.arch = models::make_architecture(cfg.substitute.arch, shape_like.rows,
                                             shape_like.cols, shape_like.channels,
                                             shape_like.classes);
  s.lambda = cfg.substitute.lambda;
  s.tau = cfg.substitute.tau;
  s.reservoir = cfg.substitute.reservoir;
  s.sigma = cfg.substitute.sigma;
  s.kappa = cfg.substitute.kappa;
  s.max_rho = cfg.substitute.max_rho;
  s.inner.epochs = cfg.substitute.epochs;
  s.inner.learning_rate = cfg.substitute.learning_rate;
  s.inner.momentum = cfg.substitute.momentum;
  s.inner.batch_size = cfg.substitute.batch_size;
  return s;
}

data::SeedSplit split_seeds(const io::ExperimentConfig& cfg,
                            const data::LabeledDataset& test, SeededRng rng) {
  if (cfg.substitute.seeds_per_class > 0)
    return data::take_seed_set_per_class(test, cfg.substitute.seeds_per_class, rng);
  return data::take_seed_set(test, cfg.substitute.seeds, rng);
}

std::string eps_tag(double eps) {
  std::string t = format_double(eps);
  for (char& c : t)
    if (c == '.') c = 'p';
  return t;
}

}  // namespace

DatasetPair load_dataset(const io::DatasetConfig& cfg, std::uint64_t seed) {
  DatasetPair out;
  if (cfg.kind == "synthetic-digits") {
    out.train = data::synth_digits(cfg.train_count, SeededRng(seed, kDatasetStream),
                                   cfg.noise_sd);
    out.test = data::synth_digits(cfg.test_count,
                                  SeededRng(seed, kDatasetStream).child(0xEE),
                                  cfg.noise_sd);
  } else if (cfg.kind == "synthetic-blobs") {
    // One cluster layout for both splits: the test split must follow the
    // train distribution, so carve it from the same generator stream.
    const int total_per_class =
        cfg.per_class + (cfg.test_count + cfg.classes - 1) / cfg.classes;
    data::LabeledDataset all = data::synth_blobs(cfg.classes, cfg.dims, total_per_class,
                                                 cfg.spread, SeededRng(seed, kDatasetStream));
    SeededRng shuffle_rng = SeededRng(seed, kDatasetStream).child(0xEE);
    std::vector<std::size_t> idx(all.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[shuffle_rng.below(i)]);
    out.train = out.test = all;
    out.train.inputs.clear();
    out.train.labels.clear();
    out.test.inputs.clear();
    out.test.labels.clear();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      auto& dst = k < static_cast<std::size_t>(cfg.test_count) ? out.test : out.train;
      dst.inputs.push_back(all.inputs[idx[k]]);
      dst.labels.push_back(all.labels[idx[k]]);
    }
  } else if (cfg.kind == "idx") {
    out.train = data::load_idx(cfg.train_images, cfg.train_labels);
    out.test = data::load_idx(cfg.test_images, cfg.test_labels);
  } else if (cfg.kind == "csv") {
    out.train = data::load_csv(cfg.train_path, cfg.label_column);
    out.test = data::load_csv(cfg.test_path, cfg.label_column);
  } else {
    throw ConfigError("dataset: unknown kind " + cfg.kind);
  }
  out.train.validate();
  out.test.validate();
  if (out.train.dim() != out.test.dim())
    throw ConfigError("dataset: train/test dimension mismatch");
  return out;
}

std::unique_ptr<models::Classifier> train_oracle_model(const io::ExperimentConfig& cfg,
                                                       const data::LabeledDataset& train,
                                                       std::uint64_t seed) {
  const auto& o = cfg.oracle;
  const models::TrainingConfig tc = oracle_training(o, SeededRng(seed, kOracleStream));
  if (o.kind == "network") {
    const auto arch = models::make_architecture(o.arch, train.rows, train.cols,
                                                train.channels, train.classes);
    return models::train_network(arch, train, tc);
  }
  if (o.kind == "logistic") return models::train_logistic(train, tc);
  if (o.kind == "svm") return models::train_linear_svm(train, tc, o.l2);
  if (o.kind == "tree")
    return models::train_decision_tree(train, {o.max_depth, o.min_leaf});
  if (o.kind == "knn") return models::train_knn(train, o.k);
  throw ConfigError("oracle: unknown kind " + o.kind);
}

AttackOutcome run_attack(const io::ExperimentConfig& cfg, const std::string& out_dir,
                         std::uint64_t seed, const std::string& oracle_url) {
  const auto t0 = std::chrono::steady_clock::now();
  io::ensure_directory(out_dir);
  AttackOutcome outcome;

  const DatasetPair ds = load_dataset(cfg.dataset, seed);

  // Oracle handles: the attack handle carries the budget, evaluation gets
  // its own unmetered handle so attack accounting stays honest.
  std::shared_ptr<const models::Classifier> local_model;
  double oracle_accuracy = -1.0;
  if (oracle_url.empty()) {
    if (!cfg.oracle.model_path.empty())
      local_model = models::load_classifier(cfg.oracle.model_path);
    else
      local_model = train_oracle_model(cfg, ds.train, seed);
    oracle_accuracy = models::accuracy(*local_model, ds.test);
  }
  oracle::OracleHandle attack_handle =
      local_model ? oracle::OracleHandle::local(local_model, cfg.run.budget)
                  : oracle::OracleHandle::remote(oracle_url, cfg.run.budget);
  oracle::OracleHandle eval_handle = local_model
                                         ? oracle::OracleHandle::local(local_model)
                                         : oracle::OracleHandle::remote(oracle_url);

  // Seed split from the test distribution; the remainder is evaluation-only.
  const data::SeedSplit split = split_seeds(cfg, ds.test, SeededRng(seed, kSeedSplitStream));

  // Held-out agreement probe for the per-epoch history.
  const std::size_t agree_n =
      cfg.substitute.agreement_count > 0
          ? std::min<std::size_t>(split.eval.size(),
                                  static_cast<std::size_t>(cfg.substitute.agreement_count))
          : split.eval.size();
  const std::span<const Vec> agree_span(split.eval.inputs.data(), agree_n);
  substitute::EvalHook hook = [&](const models::Classifier& f) {
    return analysis::agreement(f, eval_handle, agree_span);
  };

  const substitute::SubstituteConfig scfg = substitute_config(cfg, ds.test);
  substitute::SubstituteRun run = substitute::train_substitute(
      attack_handle, split.seeds, scfg, SeededRng(seed, kSubstituteStream), &hook);
  outcome.budget_exhausted = run.budget_exhausted;
  io::write_text_file(out_dir + "/substitute_history.csv",
                      substitute::history_csv(run.history));
  if (run.substitute) models::save_classifier(*run.substitute, out_dir + "/substitute.bin");
  if (!run.history.empty()) outcome.final_agreement = run.history.back().heldout_agreement;

  json manifest;
  manifest["config"] = cfg.raw;
  manifest["seed"] = seed;
  manifest["oracle_url"] = oracle_url;
  manifest["oracle_test_accuracy"] = oracle_accuracy;
  manifest["budget_exhausted"] = run.budget_exhausted;

  // Crafting sweeps run only when the substitute exists (budget may have
  // died during the very first labeling pass).
  if (run.substitute && !run.budget_exhausted) {
    const std::size_t eval_n =
        cfg.craft.eval_count > 0
            ? std::min<std::size_t>(split.eval.size(),
                                    static_cast<std::size_t>(cfg.craft.eval_count))
            : split.eval.size();

    std::string fgsm_csv = "eps,success_rate,transferability,l1_budget\n";
    for (const double eps : cfg.craft.fgsm_epsilons) {
      std::vector<craft::AdversarialRecord> records;
      records.reserve(eval_n);
      for (std::size_t i = 0; i < eval_n; ++i) {
        const Vec& x = split.eval.inputs[i];
        const int y_grad = eval_handle.query_label(x);
        records.push_back(
            craft::fgsm(*run.substitute, x, y_grad, eps, split.eval.labels[i]));
      }
      const double success = analysis::success_rate(records);
      const double transfer = analysis::transferability(eval_handle, records);
      fgsm_csv += format_double(eps) + ',' + format_double(success) + ',' +
                  format_double(transfer) + ',' + format_double(craft::l1_budget(eps, 1.0)) +
                  '\n';
      outcome.fgsm_rows.push_back({eps, success, transfer});
      const auto cm = analysis::confusion(eval_handle, records);
      io::write_text_file(out_dir + "/confusion_eps" + eps_tag(eps) + ".csv",
                          analysis::confusion_csv(cm));
      if (cfg.craft.emit_records)
        craft::save_records(records, "fgsm eps=" + format_double(eps),
                            out_dir + "/records_fgsm_eps" + eps_tag(eps) + ".bin");
    }
    io::write_text_file(out_dir + "/fgsm_sweep.csv", fgsm_csv);

    if (!cfg.craft.jsma_upsilons.empty()) {
      const std::size_t jsma_n =
          std::min<std::size_t>(eval_n, static_cast<std::size_t>(cfg.craft.jsma_samples));
      const int n_classes = attack_handle.classes();
      std::string jsma_csv = "upsilon,success_rate,transferability,mean_l1_budget\n";
      for (const double upsilon : cfg.craft.jsma_upsilons) {
        std::vector<craft::AdversarialRecord> records;
        records.reserve(jsma_n);
        for (std::size_t i = 0; i < jsma_n; ++i) {
          const Vec& x = split.eval.inputs[i];
          const int y_grad = eval_handle.query_label(x);
          craft::JsmaConfig jc;
          jc.upsilon = upsilon;
          jc.epsilon = cfg.craft.jsma_epsilon;
          jc.target = static_cast<int>(
              (y_grad + 1 + static_cast<int>(i % static_cast<std::size_t>(n_classes - 1))) %
              n_classes);
          records.push_back(craft::jsma(*run.substitute, x, jc, split.eval.labels[i]));
        }
        const double success = analysis::success_rate(records);
        const double transfer = analysis::transferability(eval_handle, records);
        double mean_l1 = 0.0;
        for (const auto& r : records)
          mean_l1 += craft::l1_budget(cfg.craft.jsma_epsilon,
                                      static_cast<double>(r.components_changed) /
                                          static_cast<double>(r.x.size()));
        mean_l1 /= static_cast<double>(records.size());
        jsma_csv += format_double(upsilon) + ',' + format_double(success) + ',' +
                    format_double(transfer) + ',' + format_double(mean_l1) + '\n';
        if (cfg.craft.emit_records)
          craft::save_records(records, "jsma upsilon=" + format_double(upsilon),
                              out_dir + "/records_jsma_u" + eps_tag(upsilon) + ".bin");
      }
      io::write_text_file(out_dir + "/jsma_sweep.csv", jsma_csv);
    }
  }

  manifest["attack_ledger"] = {{"total", attack_handle.ledger().total()},
                               {"per_epoch", attack_handle.ledger().per_epoch()}};
  manifest["eval_ledger"] = {{"total", eval_handle.ledger().total()}};
  manifest["final_agreement"] = outcome.final_agreement;
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
  return outcome;
}

void run_defense(const io::ExperimentConfig& cfg, const std::string& out_dir,
                 std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  io::ensure_directory(out_dir);
  const DatasetPair ds = load_dataset(cfg.dataset, seed);
  if (cfg.oracle.kind != "network")
    throw ConfigError("defense: the defended oracle must be a network");

  const auto arch = models::make_architecture(cfg.oracle.arch, ds.train.rows, ds.train.cols,
                                              ds.train.channels, ds.train.classes);
  io::OracleConfig otrain = cfg.oracle;
  if (cfg.defense.epochs > 0) otrain.epochs = cfg.defense.epochs;
  if (cfg.defense.decay_every >= 0) otrain.decay_every = cfg.defense.decay_every;

  // Evaluation subset: the first eval_count test rows after the seed split.
  const data::SeedSplit split = split_seeds(cfg, ds.test, SeededRng(seed, kSeedSplitStream));
  data::LabeledDataset eval_set;
  eval_set.rows = ds.test.rows;
  eval_set.cols = ds.test.cols;
  eval_set.channels = ds.test.channels;
  eval_set.classes = ds.test.classes;
  const std::size_t eval_n =
      std::min<std::size_t>(split.eval.size(),
                            static_cast<std::size_t>(cfg.defense.eval_count));
  eval_set.inputs.assign(split.eval.inputs.begin(),
                         split.eval.inputs.begin() + static_cast<std::ptrdiff_t>(eval_n));
  eval_set.labels.assign(split.eval.labels.begin(),
                         split.eval.labels.begin() + static_cast<std::ptrdiff_t>(eval_n));

  struct Variant {
    std::string tag;
    std::unique_ptr<models::Classifier> model;
  };
  std::vector<Variant> variants;

  // Undefended control first.
  {
    const auto tc = oracle_training(otrain, SeededRng(seed, kDefenseStream).child(0));
    variants.push_back({"baseline", models::train_network(arch, ds.train, tc)});
  }
  if (cfg.defense.mode == "advtrain") {
    std::uint64_t i = 1;
    for (const double te : cfg.defense.train_epsilons) {
      defense::AdvTrainConfig ac;
      ac.train_epsilon = te;
      ac.base = oracle_training(otrain, SeededRng(seed, kDefenseStream).child(i++));
      variants.push_back(
          {"train_eps=" + format_double(te), defense::adversarial_train(arch, ds.train, ac)});
    }
  } else {
    std::uint64_t i = 1;
    for (const double temp : cfg.defense.temperatures) {
      defense::DistillConfig dc;
      dc.temperature = temp;
      dc.base = oracle_training(otrain, SeededRng(seed, kDefenseStream).child(i++));
      variants.push_back(
          {"T=" + format_double(temp), defense::distill_train(arch, ds.train, dc)});
    }
  }

  std::string csv = "mode,tag,attack_eps,o_to_o,s_to_s,s_to_o,clean_accuracy\n";
  json manifest;
  manifest["config"] = cfg.raw;
  manifest["seed"] = seed;
  std::uint64_t sub_stream = 100;
  for (const Variant& v : variants) {
    // Black-box discipline: the substitute is trained against the defended
    // oracle itself.
    auto shared = std::shared_ptr<const models::Classifier>(v.model.get(),
                                                            [](const models::Classifier*) {});
    oracle::OracleHandle handle = oracle::OracleHandle::local(shared);
    const substitute::SubstituteConfig scfg = substitute_config(cfg, ds.test);
    substitute::SubstituteRun run = substitute::train_substitute(
        handle, split.seeds, scfg, SeededRng(seed, kDefenseStream).child(sub_stream++));
    const auto rows =
        defense::evaluate_defense(*v.model, *run.substitute, eval_set,
                                  cfg.defense.attack_epsilons);
    const double clean = models::accuracy(*v.model, eval_set);
    for (const auto& r : rows)
      csv += cfg.defense.mode + ',' + v.tag + ',' + format_double(r.eps) + ',' +
             format_double(r.o_to_o) + ',' + format_double(r.s_to_s) + ',' +
             format_double(r.s_to_o) + ',' + format_double(clean) + '\n';
  }
  io::write_text_file(out_dir + "/defense_report.csv", csv);
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

void run_analyze(const io::ExperimentConfig& cfg, const std::string& substitute_path,
                 const std::string& oracle_path, const std::string& out_dir,
                 std::uint64_t seed) {
  io::ensure_directory(out_dir);
  const DatasetPair ds = load_dataset(cfg.dataset, seed);
  if (ds.test.channels != 1)
    throw ConfigError("analyze: sign matrices need single-channel data");
  if (ds.test.rows < 2 || ds.test.cols < 2)
    throw ConfigError("analyze: sign matrices need image-shaped data (rows, cols >= 2)");
  auto sub = models::load_classifier(substitute_path);
  auto orc = models::load_classifier(oracle_path);

  const std::size_t n = std::min<std::size_t>(
      ds.test.size(), cfg.craft.eval_count > 0
                          ? static_cast<std::size_t>(cfg.craft.eval_count)
                          : ds.test.size());
  const std::span<const Vec> xs(ds.test.inputs.data(), n);
  const std::span<const int> ys(ds.test.labels.data(), n);

  const auto s1 = analysis::sign_sequence(*sub, xs, ys, ds.test.rows, ds.test.cols,
                                          "substitute");
  const auto s2 = analysis::sign_sequence(*orc, xs, ys, ds.test.rows, ds.test.cols,
                                          "oracle");
  const auto freq = analysis::frequencies(s1, s2);
  const auto chi = analysis::chi_square(freq);

  // Random-pair control with the same geometry and sample count.
  analysis::SignMatrixSequence r1, r2;
  r1.rows = r2.rows = ds.test.rows;
  r1.cols = r2.cols = ds.test.cols;
  SeededRng rng(seed, kAnalyzeStream);
  for (std::size_t k = 0; k < n; ++k) {
    nd::Mat a(static_cast<std::size_t>(ds.test.rows), static_cast<std::size_t>(ds.test.cols));
    nd::Mat b(static_cast<std::size_t>(ds.test.rows), static_cast<std::size_t>(ds.test.cols));
    for (auto& v : a.data()) v = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    for (auto& v : b.data()) v = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    r1.matrices.push_back(std::move(a));
    r2.matrices.push_back(std::move(b));
  }
  const auto rfreq = analysis::frequencies(r1, r2);
  const auto rchi = analysis::chi_square(rfreq);

  std::string csv = "pair,samples,stat,dof,p_value\n";
  csv += "substitute_vs_oracle," + std::to_string(n) + ',' + format_double(chi.stat) + ',' +
         std::to_string(chi.dof) + ',' + format_double(chi.p_value) + '\n';
  csv += "random_baseline," + std::to_string(n) + ',' + format_double(rchi.stat) + ',' +
         std::to_string(rchi.dof) + ',' + format_double(rchi.p_value) + '\n';
  io::write_text_file(out_dir + "/chisq_summary.csv", csv);
  io::write_text_file(out_dir + "/freq_pooled.csv", analysis::frequency_csv(freq.r));

  const auto per = analysis::per_class_frequencies(s1, s2, ys, ds.test.classes);
  for (int c = 0; c < ds.test.classes; ++c) {
    if (!per[static_cast<std::size_t>(c)]) continue;
    io::write_text_file(out_dir + "/freq_class_" + std::to_string(c) + ".csv",
                        analysis::frequency_csv(per[static_cast<std::size_t>(c)]->r));
  }
}

}  // namespace bba::exp
