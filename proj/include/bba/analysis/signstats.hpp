#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bba/models/classifier.hpp"
#include "bba/nd/mat.hpp"

namespace bba::analysis {

using models::Classifier;
using nd::Mat;
using nd::Vec;

/// Per-sample sign matrices of the input cost gradient, reshaped to the
/// image grid. Entries are +1/-1: exact zeros (dead units and the like)
/// resolve to +1 by convention.
struct SignMatrixSequence {
  int rows = 0;
  int cols = 0;
  std::string source;           // model tag for reports
  std::vector<Mat> matrices;    // one m x n sign matrix per sample

  std::size_t count() const { return matrices.size(); }
};

SignMatrixSequence sign_sequence(const Classifier& model, std::span<const Vec> samples,
                                 std::span<const int> labels, int rows, int cols,
                                 std::string source_tag);

/// Per-entry +1 frequencies of each sequence (p, q) and of simultaneous +1
/// (r), add-one smoothed: (count + 1) / (N + 2).
struct FrequencyTriple {
  Mat p, q, r;
  std::size_t samples = 0;
};

FrequencyTriple frequencies(const SignMatrixSequence& s1, const SignMatrixSequence& s2);

struct ChiSquareResult {
  double stat = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// chi^2* = sum_ij (r N - p q N)^2 / (p q N), dof (m-1)(n-1);
/// p-value = P(chi^2_dof > chi^2*).
ChiSquareResult chi_square(const FrequencyTriple& freq);

/// frequencies() restricted to the samples of each source class; classes
/// with no samples come back empty.
std::vector<std::optional<FrequencyTriple>> per_class_frequencies(
    const SignMatrixSequence& s1, const SignMatrixSequence& s2,
    std::span<const int> labels, int classes);

/// m x n heatmap of r (simultaneous +1 frequency) as CSV.
std::string frequency_csv(const Mat& grid);

}  // namespace bba::analysis
