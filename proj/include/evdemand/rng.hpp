#pragma once

#include <cstdint>

namespace evd {

// Deterministic pseudo-random stream (splitmix64 core). Substreams are
// derived from a master seed by index, so concurrent workers can own
// independent streams and results do not depend on scheduling order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // Uniform on [0, 1).
    double uniform01();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller (one value per call, no cached state).
    double normal();

private:
    std::uint64_t state_;
};

// Stream derivation: mixes (seed, a, b) into an independent stream seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);
Rng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace evd
