#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace blockadmm {

// Instances must be reproducible from (family, seed) on any platform, so the
// distributions below are written out instead of using the implementation-defined
// std:: distributions. The engine is std::mt19937_64, whose output sequence is fixed
// by the standard.

/// Independent sub-streams derived from one instance seed.
enum class Stream : std::uint64_t {
  kMatrix = 1,     // entries and sparsity pattern of A
  kSolution = 2,   // z (l2) or the planted x* (l1)
  kPowerStart = 3  // start vectors of power iterations
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t value);

/// Seed for `stream` of the instance identified by `seed`.
std::uint64_t stream_seed(std::uint64_t seed, Stream stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via the Box-Muller transform; pairs are consumed in order.
  double normal();

  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound);

  /// `count` distinct integers from [0, range), ascending (Floyd's algorithm).
  std::vector<std::int64_t> sample_without_replacement(std::int64_t range, std::int64_t count);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace blockadmm
