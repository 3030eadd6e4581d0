#pragma once
#include <algorithm>
#include <cstdint>
#include <vector>

namespace vcrules {

// SplitMix64. Used for every random draw in the project so that runs are
// reproducible across platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, n). n == 0 returns 0.
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  uint64_t state_;
};

// Stable sub-seed derivation for stage/iteration-scoped generators.
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0) {
  Rng r(base ^ (a * 0x9e3779b97f4a7c15ull) ^ (b + 0xc2b2ae3d27d4eb4full));
  r.next();
  return r.next();
}

}  // namespace vcrules
