#pragma once

#include <cstdint>
#include <random>

namespace tcdiag {

// Finalizer of the splitmix64 generator. Used to turn arbitrary 64-bit
// values into well-mixed seeds.
inline std::uint64_t splitmix64_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Stable per-item seed derivation: hash of (master seed, item index).
// Parallel and serial generation of an indexed collection agree because each
// item draws from its own derived stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64_mix(master ^ splitmix64_mix(index + 1));
}

// Deterministic RNG with distributions implemented in-repo so that sampled
// values are identical across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64_mix(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi). Requires lo <= hi; returns lo when the range is empty.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer on [lo, hi], inclusive. Modulo bias is negligible for the
  // small ranges used here (spans far below 2^32).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tcdiag
