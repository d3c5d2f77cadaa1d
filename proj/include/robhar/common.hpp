// Shared plumbing: error types, label sentinels and the seeded random
// source used across the pipeline. All randomness in the library flows
// through Rng so results are reproducible given a seed.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace robhar {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, streams). CLI exit code 2.
struct DataError : Error {
    using Error::Error;
};

// Invalid parameters or configuration. CLI exit code 1.
struct ConfigError : Error {
    using Error::Error;
};

// Tensor/layer shape disagreement.
struct ShapeError : Error {
    using Error::Error;
};

// Label sentinels. Real class ids are >= 0.
inline constexpr int kBlankLabel = -1;  // transition / low-confidence blank
inline constexpr int kNoLabel = -2;     // unlabeled frame

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic random source. Distributions are hand-rolled on top of
// the raw generator so sampled values are stable across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x5bf0f5e6a6dcbe1fULL)) {}

    // Derives an independent stream seed from (seed, a, b, c); used to give
    // each (epoch, segment) or purpose its own reproducible stream.
    static uint64_t derive(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
        uint64_t x = splitmix64(seed);
        x = splitmix64(x ^ (a + 0x9e3779b97f4a7c15ULL));
        x = splitmix64(x ^ (b + 0xc2b2ae3d27d4eb4fULL));
        x = splitmix64(x ^ (c + 0x165667b19e3779f9ULL));
        return x;
    }

    uint64_t next_u64() {
        state_ = splitmix64(state_ + 0x9e3779b97f4a7c15ULL);
        return state_;
    }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer on [0, n).
    int uniform_int(int n) {
        return static_cast<int>(next_u64() % static_cast<uint64_t>(n));
    }

    // Standard normal via Box-Muller; one spare is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

inline void require_finite(std::span<const double> xs, const char* what) {
#ifndef NDEBUG
    if (!all_finite(xs)) throw Error(std::string("non-finite values in ") + what);
#else
    (void)xs;
    (void)what;
#endif
}

}  // namespace robhar
