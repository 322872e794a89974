#pragma once

#include <cstdint>
#include <random>

namespace lobjump {

// Deterministic random source. std::mt19937_64 is bit-exact across
// platforms, but the std distributions are not, so the transforms to
// uniform/normal/exponential are spelled out here. Every Monte Carlo
// entry point in the library routes through this class so that a seed
// pins results down to the bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // U(0,1), 53-bit resolution, never returns 0 or 1.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // N(0,1) via Box-Muller; one spare value cached per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Exp(1).
  double exponential() { return -std::log(uniform()); }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// splitmix64-style mix of a base seed and a stream index, so that
// per-replication generators are decorrelated but reproducible.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace lobjump
