#pragma once

#include <cmath>
#include <cstdint>

namespace actlearn {

// splitmix64 step; also used as a stateless hash for procedural textures.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t v) {
    return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2)));
}

// Deterministic stream with explicit state so traces and checkpoints reproduce
// byte for byte. Distinct purposes get independent derived streams, so adding
// draws in one phase does not shift any other phase.
class RngStream {
public:
    RngStream() : state_(0x853c49e6748fea9bull) {}
    explicit RngStream(uint64_t seed) : state_(splitmix64(seed ^ 0x5851f42d4c957f2dull)) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). n must be positive.
    uint64_t next_below(uint64_t n) {
        // Rejection sampling keeps the distribution exact.
        uint64_t threshold = (0ull - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller (libm-only, reproducible across stdlibs).
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stable purpose ids for derived streams.
enum class RngPurpose : uint64_t {
    kTexture = 1,
    kInit = 2,
    kPractice = 3,
    kApproach = 4,
    kEvaluation = 5,
    kDeviceNoise = 6,
};

inline RngStream derive_stream(uint64_t master_seed, RngPurpose purpose) {
    return RngStream(hash_combine(master_seed, static_cast<uint64_t>(purpose)));
}

}  // namespace actlearn
