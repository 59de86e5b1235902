#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bba/data/dataset.hpp"
#include "bba/io/config.hpp"
#include "bba/models/train.hpp"
#include "bba/oracle/oracle.hpp"

namespace bba::exp {

struct DatasetPair {
  data::LabeledDataset train;
  data::LabeledDataset test;
};

/// Materialize the configured dataset deterministically from the master seed.
DatasetPair load_dataset(const io::DatasetConfig& cfg, std::uint64_t seed);

/// Train the configured oracle kind on the train split.
std::unique_ptr<models::Classifier> train_oracle_model(const io::ExperimentConfig& cfg,
                                                       const data::LabeledDataset& train,
                                                       std::uint64_t seed);

struct AttackOutcome {
  bool budget_exhausted = false;
  double final_agreement = -1.0;
  // eps -> (success, transferability) of the FGSM sweep, in config order.
  std::vector<std::array<double, 3>> fgsm_rows;
};

/// The full black-box pipeline: oracle (train/load/remote), seed split,
/// substitute training, FGSM (and optional saliency) sweeps, CSV bundle +
/// JSON manifest under out_dir. Returns the headline numbers.
AttackOutcome run_attack(const io::ExperimentConfig& cfg, const std::string& out_dir,
                         std::uint64_t seed, const std::string& oracle_url);

/// Defense study: baseline + defended oracles, black-box substitutes
/// against each, three-way rates over the attack epsilon grid.
void run_defense(const io::ExperimentConfig& cfg, const std::string& out_dir,
                 std::uint64_t seed);

/// Gradient-sign correlation study between two saved models.
void run_analyze(const io::ExperimentConfig& cfg, const std::string& substitute_path,
                 const std::string& oracle_path, const std::string& out_dir,
                 std::uint64_t seed);

}  // namespace bba::exp
