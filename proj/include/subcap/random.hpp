#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>

namespace subcap {

/// Stream identifiers, so draws for different purposes never share a sequence.
enum class Stream : std::uint64_t {
    scatterer_gains = 1,
    scatterer_dopplers = 2,
    noise = 3,
    gaussian_channel = 4,
};

/**
 * Counter-based generator keyed by (seed, block, stream).
 *
 * Output n is a SplitMix64 finalizer applied to key + n * golden. Any block of
 * any stream can be generated independently, which keeps parallel Monte Carlo
 * reproducible regardless of scheduling.
 */
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t block, Stream stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix(key_ + golden * ++counter_); }

    std::uint64_t key() const { return key_; }

    static std::uint64_t mix(std::uint64_t z);

private:
    static constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Circular complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_normal(CounterRng& rng, double variance)
{
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

} // namespace subcap
