#ifndef CYCLOMON_RNG_HPP
#define CYCLOMON_RNG_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace cyclomon {

/// SplitMix64 step. Used to expand seeds and to derive child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Child seed for stream `index` of `parent`. Pure function of both arguments,
/// so per-source streams do not depend on evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    std::uint64_t s = parent ^ (0xd1b54a32d192ed03ULL * (index + 1));
    splitmix64(s);
    return splitmix64(s);
}

/**
 * xoshiro256++ (Blackman & Vigna). Distributions are written out by hand
 * below rather than using <random> distributions, whose output is not
 * specified bit-for-bit across standard library implementations.
 */
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256pp(std::uint64_t seed) noexcept { reseed(seed); }

    constexpr void reseed(std::uint64_t seed) noexcept {
        std::uint64_t s = seed;
        for (auto& word : _state) {
            word = splitmix64(s);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    constexpr result_type operator()() noexcept {
        const std::uint64_t result = rotl(_state[0] + _state[3], 23) + _state[0];
        const std::uint64_t t      = _state[1] << 17;
        _state[2] ^= _state[0];
        _state[3] ^= _state[1];
        _state[1] ^= _state[2];
        _state[0] ^= _state[3];
        _state[2] ^= t;
        _state[3] = rotl(_state[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    constexpr double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1], safe as a log() argument.
    constexpr double uniform_open0() noexcept { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

    /// Circular complex Gaussian with E|n|^2 = 1.
    std::complex<double> complex_gaussian() noexcept {
        const double radius = std::sqrt(-std::log(uniform_open0()));
        const double angle  = 2.0 * std::numbers::pi * uniform01();
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    bool coin() noexcept { return ((*this)() >> 63) != 0; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> _state{};
};

} // namespace cyclomon

#endif // CYCLOMON_RNG_HPP
