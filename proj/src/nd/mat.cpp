#include "bba/nd/mat.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

#include "bba/error.hpp"
#include "bba/nd/kernels.hpp"

namespace bba::nd {

Mat::Mat(std::size_t rows, std::size_t cols, Vec data)
    : rows_(rows), cols_(cols), d_(std::move(data)) {
  if (rows_ * cols_ != d_.size())
    throw DimensionError("Mat: rows*cols != data length");
}

Vec sgn(std::span<const double> v) {
  Vec out(v.size());
  kern::kernels().sgn(v.data(), out.data(), v.size());
  return out;
}

Mat sgn(const Mat& m) {
  Mat out(m.rows(), m.cols());
  kern::kernels().sgn(m.data().data(), out.data().data(), m.size());
  return out;
}

Vec clamp01(std::span<const double> v) {
  Vec out(v.size());
  kern::kernels().clamp01(v.data(), out.data(), v.size());
  return out;
}

void clamp01_inplace(std::span<double> v) {
  kern::kernels().clamp01(v.data(), v.data(), v.size());
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw ContractViolation("argmax: empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: a.cols != b.rows");
  Mat c(a.rows(), b.cols());
  const auto& k = kern::kernels();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* crow = c.row(i);
    for (std::size_t p = 0; p < a.cols(); ++p)
      k.axpy(a(i, p), b.row(p), crow, b.cols());
  }
  return c;
}

Vec matvec(const Mat& w, std::span<const double> x) {
  if (w.cols() != x.size()) throw DimensionError("matvec: w.cols != x.size");
  Vec y(w.rows());
  const auto& k = kern::kernels();
  for (std::size_t i = 0; i < w.rows(); ++i) y[i] = k.dot(w.row(i), x.data(), w.cols());
  return y;
}

void softmax_inplace(std::span<double> z) {
  if (z.empty()) throw ContractViolation("softmax: empty vector");
  double m = z[0];
  for (double v : z)
    if (v > m) m = v;
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

void softmax_inplace(std::span<double> z, double temperature) {
  if (temperature != 1.0)
    for (double& v : z) v /= temperature;
  softmax_inplace(z);
}

double linf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) {
    const double a = std::fabs(x);
    if (a > m) m = a;
  }
  return m;
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw ContractViolation(std::string(what) + ": non-finite entry");
}

std::string fingerprint_bytes(std::span<const double> v) {
  std::string out(v.size() * 8, '\0');
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v[i]);
    for (int b = 0; b < 8; ++b)
      out[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  return out;
}

std::uint64_t fingerprint_hash(std::span<const double> v) {
  // FNV-1a over the canonical byte encoding.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v[i]);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  }
  return h;
}

}  // namespace bba::nd
