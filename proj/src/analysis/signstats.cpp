#include "bba/analysis/signstats.hpp"

#include <charconv>

#include "bba/error.hpp"
#include "bba/nd/special.hpp"

namespace bba::analysis {

SignMatrixSequence sign_sequence(const Classifier& model, std::span<const Vec> samples,
                                 std::span<const int> labels, int rows, int cols,
                                 std::string source_tag) {
  if (!model.differentiable())
    throw UnsupportedOperation("sign_sequence: model kind has no gradients");
  if (samples.size() != labels.size())
    throw ContractViolation("sign_sequence: samples/labels length mismatch");
  if (rows * cols != model.in_dim())
    throw DimensionError("sign_sequence: grid does not match input dim");
  SignMatrixSequence seq;
  seq.rows = rows;
  seq.cols = cols;
  seq.source = std::move(source_tag);
  seq.matrices.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec g = model.input_cost_gradient(samples[i], labels[i]);
    Mat m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (std::size_t p = 0; p < g.size(); ++p)
      m.data()[p] = g[p] < 0.0 ? -1.0 : 1.0;  // zeros resolve to +1
    seq.matrices.push_back(std::move(m));
  }
  return seq;
}

FrequencyTriple frequencies(const SignMatrixSequence& s1, const SignMatrixSequence& s2) {
  if (s1.rows != s2.rows || s1.cols != s2.cols)
    throw DimensionError("frequencies: dimension mismatch");
  if (s1.count() != s2.count() || s1.count() == 0)
    throw ContractViolation("frequencies: sequences must have equal nonzero length");
  const std::size_t rows = static_cast<std::size_t>(s1.rows);
  const std::size_t cols = static_cast<std::size_t>(s1.cols);
  const double n = static_cast<double>(s1.count());
  FrequencyTriple f{Mat(rows, cols), Mat(rows, cols), Mat(rows, cols), s1.count()};
  for (std::size_t k = 0; k < s1.count(); ++k) {
    const Vec& a = s1.matrices[k].data();
    const Vec& b = s2.matrices[k].data();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const bool pa = a[i] > 0.0;
      const bool pb = b[i] > 0.0;
      if (pa) f.p.data()[i] += 1.0;
      if (pb) f.q.data()[i] += 1.0;
      if (pa && pb) f.r.data()[i] += 1.0;
    }
  }
  for (std::size_t i = 0; i < f.p.data().size(); ++i) {
    f.p.data()[i] = (f.p.data()[i] + 1.0) / (n + 2.0);
    f.q.data()[i] = (f.q.data()[i] + 1.0) / (n + 2.0);
    f.r.data()[i] = (f.r.data()[i] + 1.0) / (n + 2.0);
  }
  return f;
}

ChiSquareResult chi_square(const FrequencyTriple& freq) {
  const std::size_t rows = freq.p.rows();
  const std::size_t cols = freq.p.cols();
  const double n = static_cast<double>(freq.samples);
  ChiSquareResult out;
  double stat = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double pq = freq.p(i, j) * freq.q(i, j);
      const double diff = freq.r(i, j) * n - pq * n;
      stat += diff * diff / (pq * n);
    }
  out.stat = stat;
  out.dof = static_cast<int>((rows - 1) * (cols - 1));
  out.p_value = nd::chi_square_survival(stat, static_cast<double>(out.dof));
  return out;
}

std::vector<std::optional<FrequencyTriple>> per_class_frequencies(
    const SignMatrixSequence& s1, const SignMatrixSequence& s2,
    std::span<const int> labels, int classes) {
  if (labels.size() != s1.count())
    throw ContractViolation("per_class_frequencies: labels/sequence length mismatch");
  std::vector<std::optional<FrequencyTriple>> out(static_cast<std::size_t>(classes));
  for (int c = 0; c < classes; ++c) {
    SignMatrixSequence a, b;
    a.rows = b.rows = s1.rows;
    a.cols = b.cols = s1.cols;
    a.source = s1.source;
    b.source = s2.source;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != c) continue;
      a.matrices.push_back(s1.matrices[i]);
      b.matrices.push_back(s2.matrices[i]);
    }
    if (!a.matrices.empty())
      out[static_cast<std::size_t>(c)] = frequencies(a, b);
  }
  return out;
}

std::string frequency_csv(const Mat& grid) {
  std::string out;
  char buf[64];
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      if (c) out += ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, grid(r, c));
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

}  // namespace bba::analysis
