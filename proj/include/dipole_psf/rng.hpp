#pragma once

#include <cstdint>

namespace dpsf::rng {

/// SplitMix64 output function.
std::uint64_t mix64(std::uint64_t z);

/// Counter-based generator: draw i of a stream is mix64(key + (i + 1) * golden),
/// with key derived from (seed, stream). Independent streams need no shared state,
/// so results never depend on execution order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Poisson variate. Inversion by sequential search below mean 30,
  /// Hormann's transformed rejection (PTRS) at and above.
  std::uint64_t poisson(double mean);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dpsf::rng
