#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace grtree {

// Stateless SplitMix64 finalizer; good avalanche, used only for seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives the seed for a numbered stream so that replica r always draws from
// stream (master_seed, r) no matter which worker runs it or in what order.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream) {
  std::uint64_t a = mix64(master_seed + 0x9e3779b97f4a7c15ull);
  std::uint64_t b = mix64(stream + 0xd1b54a32d192ed03ull);
  return mix64(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

// Per-stream generator. All floating-point draws go through the two mappings
// below so the sampling path is fully specified by the engine's u64 sequence:
//   uniform01: top 53 bits scaled into [0, 1)
//   exponential: inverse CDF -log(u)/rate, with a zero uniform mapped to the
//   smallest positive representable value (2^-53) instead of producing inf
class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t master_seed, std::uint64_t stream) {
    std::uint64_t s = derive_stream_seed(master_seed, stream);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(stream), 0x6a09e667u};
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) {
    double u = uniform01();
    if (u == 0.0) u = 0x1.0p-53;
    return -std::log(u) / rate;
  }

  // Unbiased-enough index draw for resampling pools (bias < n / 2^64).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace grtree
