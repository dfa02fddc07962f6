#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dacer {

// Deterministic random source. All sampling goes through this class so a run
// is reproducible from a single seed; no global RNG state anywhere.
//
// normal() uses Box-Muller without caching the second value of the pair:
// caching would make the draw sequence depend on call parity, which makes
// forked streams and replayed runs harder to reason about. The extra cost is
// irrelevant next to the matrix work.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(mix(seed)) {}

    // Uniform in [0, 1).
    double uniform() {
        // 53-bit mantissa fill.
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal draw.
    double normal() {
        // u1 in (0, 1] so the log is finite.
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double std) { return mean + std * normal(); }

    // Uniform integer in [0, n). Multiplicative range reduction: unbiased
    // enough for our purposes (bias < 2^-64 relative) and identical across
    // platforms, unlike std::uniform_int_distribution.
    uint64_t uniform_int(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<__uint128_t>(gen_()) * n) >> 64);
    }

    // Derive an independent stream. Consumes one draw from this generator, so
    // repeated forks with the same tag still differ.
    Rng fork(uint64_t stream_tag) { return Rng(gen_() ^ mix(stream_tag)); }

    uint64_t raw() { return gen_(); }

  private:
    // splitmix64 finalizer: decorrelates small/sequential seeds.
    static uint64_t mix(uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 gen_;
};

} // namespace dacer
