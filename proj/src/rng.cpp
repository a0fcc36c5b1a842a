#include "evdemand/rng.hpp"

#include <cmath>

namespace evd {

namespace {
// splitmix64 step (Steele/Lea/Vigna); also used as the seed mixer.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform01() {
    // 53 random mantissa bits -> [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log() finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = seed;
    std::uint64_t h = splitmix64(x);
    x ^= a * 0xD6E8FEB86659FD93ULL;
    h ^= splitmix64(x);
    x ^= b * 0xA3B195354A39B70DULL;
    h ^= splitmix64(x);
    return h;
}

Rng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return Rng(mix_seed(seed, a, b));
}

}  // namespace evd
