#pragma once

#include <cstdint>
#include <random>

namespace slideflow {

// Deterministic RNG with cheap stream derivation. Every consumer derives its
// own child stream from a master seed via split(), so the draw order of one
// component never perturbs another. Same seed + same call sequence -> same
// numbers, which is what the reproducibility guarantees lean on.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    // Child stream whose sequence is independent of this stream's draw count.
    RngStream split(std::uint64_t tag) const;

    std::uint64_t next_u64();
    double uniform();                        // [0, 1)
    double uniform(double lo, double hi);    // [lo, hi)
    double normal();                         // standard normal
    double gamma(double shape, double scale);
    long long poisson(double mean);
    std::size_t index(std::size_t n);        // uniform in [0, n)

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t root_;
    std::mt19937_64 engine_;
};

// SplitMix64 mixing step; used for seed derivation and checksums of seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace slideflow
