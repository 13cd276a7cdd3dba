#pragma once

#include <cstdint>
#include <random>

namespace spmqc::protocol {

/// Deterministic random stream. Draws avoid std::*_distribution so that the
/// produced sequences are identical across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double real01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return real01() < p; }

  /// Uniform integer in [0, n); n > 0.
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(u64()) * n) >> 64);
  }

  std::uint8_t bit() { return static_cast<std::uint8_t>(u64() >> 63); }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 step; used to derive independent per-role seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + stream * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// One independent stream per protocol role, so perturbing one role's draws
/// does not shift any other role's sequence.
struct RoleRngs {
  Rng alice;
  Rng bob;
  Rng charlie;
  Rng channel;
  Rng eve;

  explicit RoleRngs(std::uint64_t session_seed)
      : alice(mix_seed(session_seed, 1)),
        bob(mix_seed(session_seed, 2)),
        charlie(mix_seed(session_seed, 3)),
        channel(mix_seed(session_seed, 4)),
        eve(mix_seed(session_seed, 5)) {}
};

}  // namespace spmqc::protocol
