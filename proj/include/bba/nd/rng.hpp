#pragma once

#include <cstdint>

namespace bba::nd {

/// Small-state deterministic generator (PCG32) with explicit stream
/// selection. Identical (seed, stream_id) pairs produce the identical draw
/// sequence on every platform: all state transitions are integer-only.
///
/// Instances are single-owner; parallel or per-sample work should derive
/// independent children via child(), never share one instance.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double uniform01();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via the polar method (second draw cached).
  double normal();
  /// Unbiased integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Independent derived stream; deterministic in (seed, stream_id, child_id).
  SeededRng child(std::uint64_t child_id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used for stream derivation and fingerprint hashing.
std::uint64_t mix64(std::uint64_t x);

}  // namespace bba::nd
