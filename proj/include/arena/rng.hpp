#pragma once

#include <cstdint>
#include <random>

namespace arena {

/// Seeded random stream. Wraps std::mt19937_64 but derives doubles and
/// bounded integers by hand so sequences are identical across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.engine_ == b.engine_ && a.draws_ == b.draws_;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
};

/// Mixes a base seed with an index into an independent seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace arena
