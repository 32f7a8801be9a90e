// rng.hpp - deterministic random stream and seed derivation.
//
// All stochastic draws in the project run through RandomStream so that a
// given seed reproduces identical results on every platform.  The engine
// (std::mt19937_64) is bit-exact by the standard; doubles are produced by
// an explicit 53-bit mapping instead of std::uniform_real_distribution,
// whose output is implementation-defined.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace dqdsim {

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1): top 53 bits of one engine draw.
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("uniform: requires lo < hi");
    return lo + (hi - lo) * uniform();
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Independent per-run seed from a base seed and a run index
// (SplitMix64 finalizer).  Used to give every ensemble member its own
// stream without correlations between neighbouring indices.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace dqdsim
