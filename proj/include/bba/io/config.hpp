#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bba::io {

/// Flat sectioned key-value experiment configuration. Parsing validates
/// everything up front: unknown sections or keys, malformed numbers and
/// missing required keys are all ConfigError.
struct DatasetConfig {
  std::string kind = "synthetic-digits";  // synthetic-digits | synthetic-blobs | idx | csv
  int train_count = 2000;
  int test_count = 1000;
  double noise_sd = 0.02;  // synthetic-digits
  int classes = 3;         // synthetic-blobs
  int dims = 16;
  int per_class = 200;
  double spread = 0.08;
  std::string train_images, train_labels, test_images, test_labels;  // idx
  std::string train_path, test_path;                                 // csv
  int label_column = 0;
};

struct OracleConfig {
  std::string kind = "network";  // network | logistic | svm | tree | knn
  std::string arch = "A";
  int epochs = 15;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  double decay_factor = 0.5;
  int decay_every = 10;
  int batch_size = 32;
  std::string model_path;  // load instead of training when set
  int k = 3;               // knn
  int max_depth = 12;      // tree
  int min_leaf = 5;
  double l2 = 1e-4;        // svm
};

struct SubstituteSection {
  std::string kind = "network";  // network | logistic
  std::string arch = "d64r";
  int seeds = 150;
  int seeds_per_class = 0;  // used instead of `seeds` when > 0
  double lambda = 0.1;
  std::optional<int> tau;
  bool reservoir = false;
  int sigma = 3;
  int kappa = 400;
  int max_rho = 6;
  int epochs = 10;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  int batch_size = 32;
  int agreement_count = 1000;  // held-out agreement sample cap (0 = all)
};

struct CraftConfig {
  std::vector<double> fgsm_epsilons{0.1, 0.2, 0.3, 0.4};
  std::vector<double> jsma_upsilons;  // empty: skip the saliency sweep
  double jsma_epsilon = 1.0;
  int jsma_samples = 150;
  int eval_count = 0;  // FGSM eval sample cap (0 = all)
  bool emit_records = false;
};

struct DefenseSection {
  std::string mode = "advtrain";  // advtrain | distill
  std::vector<double> train_epsilons{0.15, 0.3};
  std::vector<double> temperatures{5, 10, 100};
  std::vector<double> attack_epsilons{0.3, 0.4};
  int epochs = 0;       // defended-oracle override; 0 = oracle epochs
  int decay_every = -1; // override; -1 = oracle setting
  int eval_count = 500; // evaluation sample cap
};

struct RunConfig {
  std::uint64_t seed = 42;
  std::optional<std::uint64_t> budget;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  OracleConfig oracle;
  SubstituteSection substitute;
  CraftConfig craft;
  DefenseSection defense;
  RunConfig run;
  std::string raw;  // verbatim file text, echoed into manifests
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace bba::io
