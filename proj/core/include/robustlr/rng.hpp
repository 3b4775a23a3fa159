#pragma once

#include <cstdint>

namespace robustlr {

/// Seeded, splittable pseudorandom stream.
///
/// Identical seed and identical call sequence produce identical outputs.
/// `child(i)` derives an independent stream for work item `i`, so Monte
/// Carlo trials can run in parallel and still reproduce bit-for-bit in any
/// execution order. Generation is xoshiro256++, seeding is splitmix64.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  /// Independent substream for work item `index`.
  RngStream child(std::uint64_t index) const;

  std::uint64_t next_u64();

  /// Uniform draw in the open interval (0, 1).
  double uniform();

  /// Standard normal draw (Box-Muller, two uniforms per call, no cached spare).
  double normal();

  /// Uniform integer in [0, bound) via rejection; bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);

 private:
  RngStream() = default;
  std::uint64_t state_[4];
  std::uint64_t seed_;
};

}  // namespace robustlr
