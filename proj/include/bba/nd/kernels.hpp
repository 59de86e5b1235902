#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace bba::nd::kern {

// Elementwise and reduction kernels over contiguous f64 buffers. Every entry
// has a scalar reference implementation plus SIMD variants selected at
// runtime; all variants are bit-identical by construction:
//
//  * elementwise kernels perform exactly one rounding per element in index
//    order (no fused multiply-add anywhere, see -ffp-contract=off);
//  * dot follows a fixed 4-accumulator convention regardless of ISA:
//    acc[l] = sum of x[i]*y[i] over i == l (mod 4) for i < n&~3, combined as
//    (acc0+acc2) + (acc1+acc3), then tail elements appended sequentially.
//
// Equivalence across variants is asserted by tests/unit_kernels.cpp.
struct KernelTable {
  const char* name;
  // out[i] = a[i] + b[i]
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] = a[i] - b[i]
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] = a[i] * b[i]
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] = c * x[i]
  void (*scale)(double c, const double* x, double* out, std::size_t n);
  // y[i] += c * x[i]
  void (*axpy)(double c, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // out[i] = max(x[i], 0)
  void (*relu)(const double* x, double* out, std::size_t n);
  // out[i] = pre[i] > 0 ? g[i] : 0
  void (*relu_bwd)(const double* pre, const double* g, double* out, std::size_t n);
  // out[i] = min(max(x[i], 0), 1)
  void (*clamp01)(const double* x, double* out, std::size_t n);
  // out[i] = x[i] > 0 ? 1 : (x[i] < 0 ? -1 : 0)
  void (*sgn)(const double* x, double* out, std::size_t n);
};

const KernelTable& scalar_kernels();

/// Active table. Picked at startup: best ISA the CPU supports, overridable
/// with the BBA_KERNELS environment variable (scalar | avx2 | neon).
const KernelTable& kernels();

/// Force a specific variant (mainly for tests). Returns false when the
/// variant is not available on this machine.
bool select_kernels(std::string_view name);

/// All variants usable on this machine, scalar first.
std::vector<const KernelTable*> available_kernels();

}  // namespace bba::nd::kern
