#include <cstddef>

#include "bba/nd/kernels.hpp"

namespace bba::nd::kern {
namespace {

void add_s(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_s(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_s(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_s(double c, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = c * x[i];
}

void axpy_s(double c, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += c * x[i];
}

double dot_s(const double* x, const double* y, std::size_t n) {
  // Mirrors the SIMD lane layout; see the convention in kernels.hpp.
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc0 += x[i] * y[i];
    acc1 += x[i + 1] * y[i + 1];
    acc2 += x[i + 2] * y[i + 2];
    acc3 += x[i + 3] * y[i + 3];
  }
  double s = (acc0 + acc2) + (acc1 + acc3);
  for (std::size_t i = n4; i < n; ++i) s += x[i] * y[i];
  return s;
}

void relu_s(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_s(const double* pre, const double* g, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = pre[i] > 0.0 ? g[i] : 0.0;
}

void clamp01_s(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i];
    v = v > 0.0 ? v : 0.0;
    out[i] = v < 1.0 ? v : 1.0;
  }
}

void sgn_s(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar", add_s,      sub_s,      mul_s, scale_s,
      axpy_s,   dot_s,      relu_s,     relu_bwd_s,
      clamp01_s, sgn_s,
  };
  return table;
}

}  // namespace bba::nd::kern
