#include "slideflow/rng.hpp"

#include "slideflow/errors.hpp"

namespace slideflow {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : root_(seed), engine_(splitmix64(seed)) {}

RngStream RngStream::split(std::uint64_t tag) const {
    // Derivation depends only on the root seed and the tag, never on how many
    // draws this stream has produced.
    return RngStream(splitmix64(root_ ^ splitmix64(tag + 0x51AFD0ull)));
}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform() {
    // 53-bit mantissa from the top bits; strictly < 1.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    require(lo <= hi, "uniform: lo must not exceed hi");
    return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
    std::normal_distribution<double> d(0.0, 1.0);
    return d(engine_);
}

double RngStream::gamma(double shape, double scale) {
    require(shape > 0.0 && scale > 0.0, "gamma: shape and scale must be positive");
    std::gamma_distribution<double> d(shape, scale);
    return d(engine_);
}

long long RngStream::poisson(double mean) {
    require(mean >= 0.0, "poisson: mean must be non-negative");
    if (mean == 0.0) return 0;
    std::poisson_distribution<long long> d(mean);
    return d(engine_);
}

std::size_t RngStream::index(std::size_t n) {
    require(n > 0, "index: n must be positive");
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(engine_);
}

}  // namespace slideflow
