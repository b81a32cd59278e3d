#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace rain {

// Deterministic counter-free PRNG (splitmix64). Every consumer derives a
// named substream from the single run seed so that independent stages draw
// from independent streams regardless of call order elsewhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t hash_name(std::string_view name) {
        std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
        for (unsigned char c : name) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return h;
    }

    static Rng substream(std::uint64_t seed, std::string_view name,
                         std::uint64_t index = 0) {
        std::uint64_t s = seed ^ hash_name(name);
        s += 0x9e3779b97f4a7c15ull * (index + 1);
        Rng r(s);
        r.next_u64();  // decorrelate nearby seeds
        return r;
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        // Modulo bias is negligible for n << 2^64 and keeps the stream
        // consumption rate fixed at one draw per call.
        return next_u64() % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller. Draws exactly two uniforms per call so
    // the stream position stays a pure function of the call count.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace rain
