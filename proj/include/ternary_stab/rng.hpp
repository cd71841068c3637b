// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deterministic random streams.
//
// Everything reproducible in this library is driven by std::mt19937_64 (fully
// specified by the standard) or by SplitMix64, with our own uniform/normal
// transforms, so reports are bit-identical across standard libraries.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace tstab {

/// SplitMix64 finalizer; a good 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent sub-seed for stream `stream` of a parent seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// 53 random mantissa bits mapped to [0, 1).
constexpr double to_unit_double(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

template <class Engine>
class BasicRng {
public:
    explicit BasicRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return static_cast<std::uint64_t>(engine_()); }

    /// Uniform on [0, 1).
    double uniform() { return to_unit_double(bits()); }

    /// Standard normal via Box-Muller (one draw per call, no caching).
    double gaussian() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Circular complex normal with E|z|^2 = 1.
    std::complex<double> complex_gaussian() {
        const double re = gaussian();
        const double im = gaussian();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

private:
    Engine engine_;
};

/// Minimal engine with the 64-bit SplitMix64 sequence; cheap to construct.
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t operator()() {
        const std::uint64_t out = mix64(state_);
        state_ += 0x9e3779b97f4a7c15ULL;
        return out;
    }

private:
    std::uint64_t state_;
};

/// Default stream for sampling.
using Rng = BasicRng<std::mt19937_64>;
/// Throwaway stream used inside evaluators (constructed per call).
using FastRng = BasicRng<SplitMix64>;

}  // namespace tstab
