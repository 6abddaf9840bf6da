#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mgv/tensor.hpp"

namespace mgv {

// Counter-based deterministic generator (splitmix64 stream). State is the
// pair (seed, counter), so it serializes into two 64-bit words and the same
// seed + call sequence always replays the same values.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : seed_(seed), counter_(0) {}

  uint64_t next_u64() {
    uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, two uniforms per draw (no cached spare, keeps state trivial).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

  uint64_t seed() const { return seed_; }
  uint64_t counter() const { return counter_; }
  void restore(uint64_t seed, uint64_t counter) {
    seed_ = seed;
    counter_ = counter;
  }

 private:
  uint64_t seed_;
  uint64_t counter_;
};

inline Tensor sample_gaussian(Rng& rng, int rows, int cols) {
  Tensor t(rows, cols);
  for (int i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

inline Tensor sample_uniform(Rng& rng, int rows, int cols, double lo, double hi) {
  Tensor t(rows, cols);
  for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Fisher-Yates with the artifact rng; deterministic per seed.
template <typename T>
void shuffle(Rng& rng, std::vector<T>& v) {
  for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
    int j = rng.uniform_int(i + 1);
    std::swap(v[i], v[j]);
  }
}

}  // namespace mgv
