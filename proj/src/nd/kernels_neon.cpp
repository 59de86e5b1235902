// NEON (aarch64) kernel variants. Two float64x2 registers emulate the four
// accumulator lanes of the dot convention, so results stay bit-identical to
// the scalar and AVX2 paths.
#if defined(__aarch64__)

#include <arm_neon.h>

#include <cstddef>

#include "bba/nd/kernels.hpp"

namespace bba::nd::kern {
namespace {

void add_v(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_v(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_v(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_v(double c, const double* x, double* out, std::size_t n) {
  const float64x2_t vc = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vc, vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = c * x[i];
}

void axpy_v(double c, const double* x, double* y, std::size_t n) {
  const float64x2_t vc = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t prod = vmulq_f64(vc, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < n; ++i) y[i] += c * x[i];
}

double dot_v(const double* x, const double* y, std::size_t n) {
  float64x2_t acc01 = vdupq_n_f64(0.0);  // lanes 0,1
  float64x2_t acc23 = vdupq_n_f64(0.0);  // lanes 2,3
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc01 = vaddq_f64(acc01, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    acc23 = vaddq_f64(acc23, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
  }
  // (acc0+acc2) + (acc1+acc3)
  const float64x2_t pair = vaddq_f64(acc01, acc23);
  double s = vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
  for (std::size_t i = n4; i < n; ++i) s += x[i] * y[i];
  return s;
}

void relu_v(const double* x, double* out, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmaxq_f64(vld1q_f64(x + i), zero));
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_v(const double* pre, const double* g, double* out, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t mask = vcgtq_f64(vld1q_f64(pre + i), zero);
    const float64x2_t gv = vld1q_f64(g + i);
    vst1q_f64(out + i, vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(gv))));
  }
  for (; i < n; ++i) out[i] = pre[i] > 0.0 ? g[i] : 0.0;
}

void clamp01_v(const double* x, double* out, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vminq_f64(vmaxq_f64(vld1q_f64(x + i), zero), one));
  for (; i < n; ++i) {
    double v = x[i];
    v = v > 0.0 ? v : 0.0;
    out[i] = v < 1.0 ? v : 1.0;
  }
}

void sgn_v(const double* x, double* out, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t pos = vdupq_n_f64(1.0);
  const float64x2_t neg = vdupq_n_f64(-1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(x + i);
    const uint64x2_t gt = vcgtq_f64(v, zero);
    const uint64x2_t lt = vcltq_f64(v, zero);
    const uint64x2_t p = vandq_u64(gt, vreinterpretq_u64_f64(pos));
    const uint64x2_t m = vandq_u64(lt, vreinterpretq_u64_f64(neg));
    vst1q_f64(out + i, vreinterpretq_f64_u64(vorrq_u64(p, m)));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
}

}  // namespace

const KernelTable& neon_kernels() {
  static const KernelTable table{
      "neon", add_v,      sub_v,      mul_v, scale_v,
      axpy_v, dot_v,      relu_v,     relu_bwd_v,
      clamp01_v, sgn_v,
  };
  return table;
}

}  // namespace bba::nd::kern

#endif  // __aarch64__
