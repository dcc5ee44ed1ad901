#pragma once

#include <array>
#include <cstdint>

namespace pnp {

/// xoshiro256** seeded through splitmix64.
///
/// Every random quantity in the library (masks, noise, probe vectors, test
/// matrices) is drawn from this generator so that a seed reproduces a run
/// bit-exactly on any platform. Gaussian draws use Box-Muller on top of
/// `uniform()`; no std:: distributions are involved.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  double normal();

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed, e.g. one per campaign instance.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pnp
