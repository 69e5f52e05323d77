#pragma once

#include <cstdint>
#include <random>

namespace tvlm {

// Single explicit randomness handle. Every stochastic component takes one of
// these by reference; there is no ambient/global generator anywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, n).
    std::int64_t uniform_int(std::int64_t n) {
        std::uniform_int_distribution<std::int64_t> d(0, n - 1);
        return d(engine_);
    }

    double uniform(double lo = 0.0, double hi = 1.0) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(engine_);
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        std::normal_distribution<double> d(mean, stddev);
        return d(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace tvlm
