#include "bba/nd/rng.hpp"

#include <cmath>

#include "bba/error.hpp"

namespace bba::nd {

namespace {
constexpr std::uint64_t kPcgMult = 6364136223846793005ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id) {
  inc_ = (stream_id << 1U) | 1U;
  state_ = 0;
  next_u32();
  state_ += seed;
  next_u32();
}

std::uint32_t SeededRng::next_u32() {
  const std::uint64_t old = state_;
  state_ = old * kPcgMult + inc_;
  const auto xorshifted = static_cast<std::uint32_t>(((old >> 18U) ^ old) >> 27U);
  const auto rot = static_cast<std::uint32_t>(old >> 59U);
  return (xorshifted >> rot) | (xorshifted << ((32U - rot) & 31U));
}

std::uint64_t SeededRng::next_u64() {
  const std::uint64_t hi = next_u32();
  const std::uint64_t lo = next_u32();
  return (hi << 32U) | lo;
}

double SeededRng::uniform01() {
  return static_cast<double>(next_u64() >> 11U) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
  if (bound == 0) throw ContractViolation("SeededRng::below: bound must be > 0");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

SeededRng SeededRng::child(std::uint64_t child_id) const {
  const std::uint64_t s = mix64(seed_ ^ mix64(stream_ + 0x632BE59BD9B4E019ULL));
  return SeededRng(s, mix64(stream_ * 0xD1342543DE82EF95ULL + child_id + 1));
}

}  // namespace bba::nd
