#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace aliased_ac {

/// Seeded random stream used by every sampler in the library.
///
/// Draws are built directly from the raw 64-bit engine output instead of the
/// standard distributions, whose algorithms are implementation-defined, so a
/// seed yields the same numbers with any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits. One draw.
  double uniform();

  /// Uniform on (0, 1]. One draw.
  double uniform_positive() { return 1.0 - uniform(); }

  /// Index sampled from a probability vector by inverse CDF. One draw.
  int categorical(std::span<const double> probs);

  /// Standard normal by Box-Muller. Two draws.
  double normal();

  std::uint64_t draws() const { return draws_; }

  bool operator==(const Rng& other) const {
    return engine_ == other.engine_ && draws_ == other.draws_;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Run-level seed derived from (master seed, grid index, seed index).
/// The derivation is part of the output format and must stay stable.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t grid_index, std::uint64_t seed_index);

}  // namespace aliased_ac
