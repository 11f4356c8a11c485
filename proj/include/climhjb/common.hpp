#ifndef CLIMHJB_COMMON_HPP
#define CLIMHJB_COMMON_HPP

#include <cstdint>
#include <cstdio>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace climhjb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Deterministic 64-bit generator (xoshiro256**). Self-contained so sequences
/// are identical across platforms and standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        // splitmix64 expansion of the seed into the mt-like state
        s_[0] = mix(seed += 0x9E3779B97F4A7C15ULL);
        s_[1] = mix(seed += 0x9E3779B97F4A7C15ULL);
        s_[2] = mix(seed += 0x9E3779B97F4A7C15ULL);
        s_[3] = mix(seed += 0x9E3779B97F4A7C15ULL);
    }

    std::uint64_t next_u64() {
        // xoshiro256** — small, fast, fully deterministic from the seed
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    std::string serialize() const {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%llu %llu %llu %llu",
                      (unsigned long long)s_[0], (unsigned long long)s_[1],
                      (unsigned long long)s_[2], (unsigned long long)s_[3]);
        return buf;
    }

    void deserialize(const std::string& text) {
        unsigned long long a, b, c, d;
        if (std::sscanf(text.c_str(), "%llu %llu %llu %llu", &a, &b, &c, &d) != 4)
            throw IoError("bad rng state: " + text);
        s_[0] = a; s_[1] = b; s_[2] = c; s_[3] = d;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    std::uint64_t s_[4];
};

/// FNV-1a over a byte string, rendered as 16 hex chars.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex16(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

/// Shortest exact decimal rendering: 17 significant digits round-trip any double.
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double sq(double x) { return x * x; }

/// max(x, lo) — named so the templated HJB code resolves it for doubles and
/// tape variables alike.
inline double clamp_min(double x, double lo) { return x < lo ? lo : x; }
inline double clamp_max(double x, double hi) { return x > hi ? hi : x; }
inline double square(double x) { return x * x; }

}  // namespace climhjb

#endif
