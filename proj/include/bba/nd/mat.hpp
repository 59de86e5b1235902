#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bba::nd {

using Vec = std::vector<double>;

/// Dense row-major matrix of 64-bit reals.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), d_(rows * cols, 0.0) {}
  Mat(std::size_t rows, std::size_t cols, Vec data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return d_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return d_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return d_[r * cols_ + c]; }

  double* row(std::size_t r) { return d_.data() + r * cols_; }
  const double* row(std::size_t r) const { return d_.data() + r * cols_; }
  std::span<const double> row_span(std::size_t r) const { return {row(r), cols_}; }

  Vec& data() { return d_; }
  const Vec& data() const { return d_; }

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec d_;
};

/// Three-valued sign: +1 / -1 / 0 (exact zeros stay zero).
Vec sgn(std::span<const double> v);
Mat sgn(const Mat& m);

/// Limit every entry to [0, 1].
Vec clamp01(std::span<const double> v);
void clamp01_inplace(std::span<double> v);

/// Index of the maximum entry; ties broken by lowest index. Throws on empty.
std::size_t argmax(std::span<const double> v);

/// Standard product; throws DimensionError unless a.cols == b.rows.
Mat matmul(const Mat& a, const Mat& b);

/// y = W x (y_i = dot(row_i, x)); throws on dimension mismatch.
Vec matvec(const Mat& w, std::span<const double> x);

/// Numerically shifted softmax, in place.
void softmax_inplace(std::span<double> z);
/// Softmax with temperature: softmax(z / t), in place.
void softmax_inplace(std::span<double> z, double temperature);

double linf_norm(std::span<const double> v);
double l1_norm(std::span<const double> v);

/// Throws ContractViolation when any entry is NaN or infinite.
void require_finite(std::span<const double> v, const char* what);

/// Canonical little-endian byte encoding of a vector, the exact-dedup key
/// used for oracle caches and augmentation set union.
std::string fingerprint_bytes(std::span<const double> v);
std::uint64_t fingerprint_hash(std::span<const double> v);

}  // namespace bba::nd
