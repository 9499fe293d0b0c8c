#pragma once

#include <cmath>
#include <cstdint>

// Self-contained SplitMix64 generator so sampled values are identical across
// standard libraries; only libm rounding can vary.

namespace gridsync {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30))*0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27))*0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1].
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0)*0x1.0p-53;
    }

    /// Standard normal via the Marsaglia polar method.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0*next_uniform() - 1.0;
            v = 2.0*next_uniform() - 1.0;
            s = u*u + v*v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0*std::log(s)/s);
        spare_ = v*f;
        have_spare_ = true;
        return u*f;
    }

    /// Exponential with unit rate.
    double next_exponential() { return -std::log(next_uniform()); }

    /// Independent stream for (seed, index) pairs, e.g. per Monte-Carlo sample.
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
        Rng mix(seed ^ (0xD1B54A32D192ED03ull*(index + 1)));
        return mix.next_u64();
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gridsync
