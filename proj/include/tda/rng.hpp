#pragma once

#include <cstdint>
#include <vector>

#include "tda/matrix.hpp"

namespace tda {

/// Deterministic splitmix64 generator with named sub-streams.
///
/// Every consumer (data synthesis, each network's init, batch shuffling,
/// every noise source) takes its own stream via split(), so the values any
/// one consumer sees depend only on (master seed, stream tag, draw index).
/// Standard-library distributions are implementation-defined and would break
/// replay across toolchains, so uniforms, normals and shuffles are spelled
/// out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Uniform in [0, 1), 53-bit mantissa.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]; safe under log().
  double next_open() { return 1.0 - next_unit(); }

  /// Uniform in [lo, hi).
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Uniform integer in [0, bound), unbiased via rejection.
  std::uint64_t next_below(std::uint64_t bound);

  /// Independent generator for a named sub-stream; parent state is unchanged.
  Rng split(std::uint64_t tag) const {
    return Rng(mix(state_ ^ mix(tag + 0x632BE59BD9B4E019ull)));
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Stream tags used across the project. Collected in one enum so no two
/// consumers ever collide on a tag.
enum StreamTag : std::uint64_t {
  kStreamDataSource = 1,
  kStreamDataTarget = 2,
  kStreamDataShift = 3,
  kStreamDataSubsample = 4,
  kStreamInitEncoder = 10,
  kStreamInitClassifier = 11,
  kStreamInitTaskDisc = 12,
  kStreamInitPriorDisc = 13,
  kStreamInitDomainDisc = 14,
  kStreamBatchSource = 20,
  kStreamBatchTarget = 21,
  kStreamNoiseSource = 30,
  kStreamNoiseTarget = 31,
  kStreamNoiseTargetSecond = 32,
  kStreamNoisePrior = 33,
};

/// Fills with i.i.d. standard normals via explicit Box-Muller pairs. A
/// trailing odd entry discards its pair partner, so output depends only on
/// the generator state and the count.
void fill_standard_normal(Rng& rng, double* out, std::size_t n);

Matrix sample_standard_normal(Rng& rng, int rows, int cols);

/// In-place Fisher-Yates using next_below.
void shuffle_indices(std::vector<int>& idx, Rng& rng);

}  // namespace tda
