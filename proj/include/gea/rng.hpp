#pragma once

#include <cstdint>
#include <random>

namespace gea {

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed for stream `stream` of replication `replication`. Streams are derived
// by hashing, so adding agents never perturbs the streams of existing ones.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t replication, std::uint64_t stream);

// Reserved stream ids; agent k uses stream k.
inline constexpr std::uint64_t kEnvStream = 0xE11Full << 32;
inline constexpr std::uint64_t kGraphStream = 0x6AAFull << 32;

// Random stream with platform-independent variates (std distributions are
// implementation-defined, so they are not used here).
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    // Uniform integer in [0, n); n > 0.
    std::uint64_t uniform_index(std::uint64_t n);
    bool bernoulli(double p) { return uniform01() < p; }
    // Standard normal via Box-Muller (one draw per call).
    double normal();
    // Gamma(shape, 1) via Marsaglia-Tsang.
    double gamma(double shape);

    bool operator==(const Rng& other) const { return engine_ == other.engine_; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace gea
