#include "bba/nd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace bba::nd::kern {

#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_kernels();
#endif
#if defined(__aarch64__)
const KernelTable& neon_kernels();
#endif

namespace {

const KernelTable* find(std::string_view name) {
  if (name == "scalar") return &scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
  if (name == "avx2" && __builtin_cpu_supports("avx2")) return &avx2_kernels();
#endif
#if defined(__aarch64__)
  if (name == "neon") return &neon_kernels();
#endif
  return nullptr;
}

const KernelTable* pick_default() {
  if (const char* env = std::getenv("BBA_KERNELS")) {
    if (const KernelTable* t = find(env)) return t;
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2")) return &avx2_kernels();
#endif
#if defined(__aarch64__)
  return &neon_kernels();
#endif
  return &scalar_kernels();
}

const KernelTable*& active_slot() {
  static const KernelTable* active = pick_default();
  return active;
}

}  // namespace

const KernelTable& kernels() { return *active_slot(); }

bool select_kernels(std::string_view name) {
  if (const KernelTable* t = find(name)) {
    active_slot() = t;
    return true;
  }
  return false;
}

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> out{&scalar_kernels()};
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2")) out.push_back(&avx2_kernels());
#endif
#if defined(__aarch64__)
  out.push_back(&neon_kernels());
#endif
  return out;
}

}  // namespace bba::nd::kern
