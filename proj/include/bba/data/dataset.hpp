#pragma once

#include <string>
#include <vector>

#include "bba/nd/mat.hpp"
#include "bba/nd/rng.hpp"

namespace bba::data {

using nd::Vec;

/// Inputs in [0,1]^M with class labels in [0, classes).
struct LabeledDataset {
  std::vector<Vec> inputs;
  std::vector<int> labels;
  int rows = 1;      // image height m
  int cols = 0;      // image width n (flat data: cols = M, rows = 1)
  int channels = 1;
  int classes = 0;

  std::size_t size() const { return inputs.size(); }
  int dim() const { return rows * cols * channels; }

  /// Throws ContractViolation when any invariant fails (lengths, domain,
  /// label range, shape/dim agreement).
  void validate() const;
};

/// MNIST-style IDX pair (big-endian, magic 2051 images / 2049 labels),
/// pixels scaled to [0,1] by /255.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);
void save_idx(const LabeledDataset& ds, const std::string& images_path,
              const std::string& labels_path);

/// Rectangular numeric CSV, label column by index. Values are auto-scaled
/// by /255 iff any value exceeds 1.0.
LabeledDataset load_csv(const std::string& path, int label_column);
void save_csv(const LabeledDataset& ds, const std::string& path, int label_column);

/// Deterministic Gaussian class clusters clamped to [0,1]^dims.
LabeledDataset synth_blobs(int classes, int dims, int per_class, double spread,
                           nd::SeededRng rng);

/// Deterministic 28x28 grayscale digit glyphs (10 classes): seven-segment
/// skeletons under random affine jitter, stroke width/intensity variation
/// and pixel noise. A desk-scale MNIST-format stand-in. `wobble` > 1 widens
/// the jitter ranges and varies per-segment intensity, producing harder,
/// more confusable classes; 1.0 leaves the draw sequence untouched.
LabeledDataset synth_digits(int count, nd::SeededRng rng, double noise_sd = 0.03,
                            double wobble = 1.0);

struct SeedSplit {
  std::vector<Vec> seeds;   // labels deliberately dropped
  LabeledDataset eval;      // remainder, evaluation-only
};

/// Extract n_total seed inputs (uniform without replacement). The adversary
/// gets inputs only; true labels stay with the evaluation remainder.
SeedSplit take_seed_set(const LabeledDataset& ds, int n_total, nd::SeededRng rng);
/// Per-class variant: n_per_class seeds from every class.
SeedSplit take_seed_set_per_class(const LabeledDataset& ds, int n_per_class,
                                  nd::SeededRng rng);

/// Dataset manifest (shape, class count, content checksum) as a JSON file.
void write_dataset_manifest(const LabeledDataset& ds, const std::string& path);

}  // namespace bba::data
