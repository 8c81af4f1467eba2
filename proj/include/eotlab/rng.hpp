#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace eotlab::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stream key from a master seed and an index path. Streams for distinct
// paths are independent, so work units can run in any order.
inline std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(seed);
    for (std::uint64_t part : path)
        s = splitmix64(s ^ (part + 0xD1B54A32D192ED03ULL));
    return s;
}

// xoshiro256++ with splitmix64 state expansion. All downstream sampling is a
// pure function of the seed; no global state anywhere.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            word = splitmix64(s);
            s = word;
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1); safe under log().
    double uniform_open01() { return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52; }

    // Box-Muller, two fresh uniforms per deviate.
    double gaussian() {
        const double u = uniform_open01();
        const double v = uniform01();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> state_;
};

}  // namespace eotlab::rng
