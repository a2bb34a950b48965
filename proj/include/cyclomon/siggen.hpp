#ifndef CYCLOMON_SIGGEN_HPP
#define CYCLOMON_SIGGEN_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <cyclomon/rng.hpp>
#include <cyclomon/sky.hpp>

namespace cyclomon {

using cplx = std::complex<double>;

/// Uniformly sampled complex baseband samples.
struct ComplexSeries {
    std::vector<cplx> samples;
    double            sample_rate = 1.0; // Hz

    [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
    [[nodiscard]] double      mean_power() const noexcept {
        double acc = 0.0;
        for (const auto& s : samples) {
            acc += std::norm(s);
        }
        return samples.empty() ? 0.0 : acc / static_cast<double>(samples.size());
    }
};

enum class SourceKind { AstroNoise, Bpsk, CwTone };

inline const char* to_string(SourceKind kind) noexcept {
    switch (kind) {
    case SourceKind::AstroNoise: return "astro_noise";
    case SourceKind::Bpsk: return "bpsk";
    case SourceKind::CwTone: return "cw";
    }
    return "?";
}

/// One emitter in a scene. Stationary noise-like sources are AstroNoise; the
/// cyclostationary RFI kinds are Bpsk and CwTone.
struct SourceSpec {
    SourceKind     kind   = SourceKind::AstroNoise;
    double         snr_db = 0.0; // relative to per-antenna system noise power
    TrajectorySpec trajectory{};
    double         baud_rate      = 0.0; // Hz, Bpsk only
    double         carrier_offset = 0.0; // Hz, Bpsk and CwTone
    double         phase          = 0.0; // rad, CwTone only
    std::uint64_t  seed           = 0;

    void validate(double sample_rate) const {
        if (!(sample_rate > 0.0)) {
            throw std::invalid_argument("sample_rate must be positive");
        }
        if (kind == SourceKind::Bpsk && !(baud_rate > 0.0 && baud_rate < sample_rate / 2.0)) {
            throw std::invalid_argument("BPSK baud_rate must lie in (0, sample_rate/2)");
        }
        if (kind != SourceKind::AstroNoise && !(std::abs(carrier_offset) < sample_rate / 2.0)) {
            throw std::invalid_argument("carrier_offset must satisfy |offset| < sample_rate/2");
        }
        if (!std::isfinite(snr_db)) {
            throw std::invalid_argument("snr_db must be finite");
        }
    }
};

/// Linear source power for an SNR quoted against the per-antenna noise power.
[[nodiscard]] inline double power_from_snr_db(double snr_db, double noise_power = 1.0) noexcept {
    return noise_power * std::pow(10.0, snr_db / 10.0);
}

namespace detail {

inline void require_count(std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("sample count must be at least 1");
    }
}

inline void require_power(double power) {
    if (!(power >= 0.0) || !std::isfinite(power)) {
        throw std::invalid_argument("power must be finite and non-negative");
    }
}

/// exp(j*2*pi*cycles) with the integer part of `cycles` removed first, which
/// keeps long tones accurate and makes the result odd in `cycles`.
inline cplx unit_phasor(double cycles) noexcept {
    const double frac  = cycles - std::round(cycles);
    const double angle = 2.0 * std::numbers::pi * frac;
    return {std::cos(angle), std::sin(angle)};
}

} // namespace detail

/// i.i.d. circular complex Gaussian samples of mean power `power`.
[[nodiscard]] inline ComplexSeries gen_noise(std::size_t n, double power, std::uint64_t seed, double sample_rate = 1.0) {
    detail::require_count(n);
    detail::require_power(power);
    if (!(sample_rate > 0.0)) {
        throw std::invalid_argument("sample_rate must be positive");
    }
    ComplexSeries out{std::vector<cplx>(n), sample_rate};
    Xoshiro256pp  rng(seed);
    const double  amp = std::sqrt(power);
    for (auto& s : out.samples) {
        s = amp * rng.complex_gaussian();
    }
    return out;
}

/**
 * Rectangular-pulse BPSK. Equiprobable +/-1 symbols are held between the
 * boundaries round(k * sample_rate / baud_rate) and the result is mixed to
 * `carrier_offset`. Constant modulus sqrt(power).
 */
[[nodiscard]] inline ComplexSeries gen_bpsk(std::size_t n, double baud_rate, double carrier_offset, double sample_rate, double power, std::uint64_t seed) {
    detail::require_count(n);
    detail::require_power(power);
    if (!(sample_rate > 0.0)) {
        throw std::invalid_argument("sample_rate must be positive");
    }
    if (!(baud_rate > 0.0) || !(baud_rate < sample_rate / 2.0)) {
        throw std::invalid_argument("baud_rate must lie in (0, sample_rate/2)");
    }
    if (!(std::abs(carrier_offset) < sample_rate / 2.0)) {
        throw std::invalid_argument("carrier_offset must satisfy |offset| < sample_rate/2");
    }

    ComplexSeries      out{std::vector<cplx>(n), sample_rate};
    Xoshiro256pp       rng(seed);
    const double       samples_per_symbol = sample_rate / baud_rate;
    const double       amp                = std::sqrt(power);
    std::uint64_t      symbol_index       = 0;
    auto               boundary           = [&](std::uint64_t k) { return static_cast<std::size_t>(std::llround(static_cast<double>(k) * samples_per_symbol)); };
    std::size_t        next_boundary      = boundary(1);
    double             symbol             = rng.coin() ? 1.0 : -1.0;
    const double       cycles_per_sample  = carrier_offset / sample_rate;

    for (std::size_t k = 0; k < n; ++k) {
        while (k >= next_boundary) {
            ++symbol_index;
            next_boundary = boundary(symbol_index + 1);
            symbol        = rng.coin() ? 1.0 : -1.0;
        }
        out.samples[k] = (amp * symbol) * detail::unit_phasor(cycles_per_sample * static_cast<double>(k));
    }
    return out;
}

/// Complex tone sqrt(power) * exp(j(2 pi freq k / fs + phase)).
[[nodiscard]] inline ComplexSeries gen_cw(std::size_t n, double freq, double sample_rate, double power, double phase = 0.0) {
    detail::require_count(n);
    detail::require_power(power);
    if (!(sample_rate > 0.0)) {
        throw std::invalid_argument("sample_rate must be positive");
    }
    if (!(std::abs(freq) < sample_rate / 2.0)) {
        throw std::invalid_argument("tone frequency aliases: |freq| must be below sample_rate/2");
    }
    ComplexSeries out{std::vector<cplx>(n), sample_rate};
    const double  amp          = std::sqrt(power);
    const double  phase_cycles = phase / (2.0 * std::numbers::pi);
    for (std::size_t k = 0; k < n; ++k) {
        out.samples[k] = amp * detail::unit_phasor(freq * static_cast<double>(k) / sample_rate + phase_cycles);
    }
    return out;
}

/// Waveform for `spec` with the given stream seed and noise reference.
[[nodiscard]] inline ComplexSeries generate(const SourceSpec& spec, std::size_t n, double sample_rate, std::uint64_t seed, double noise_power = 1.0) {
    spec.validate(sample_rate);
    const double power = power_from_snr_db(spec.snr_db, noise_power);
    switch (spec.kind) {
    case SourceKind::AstroNoise: return gen_noise(n, power, seed, sample_rate);
    case SourceKind::Bpsk: return gen_bpsk(n, spec.baud_rate, spec.carrier_offset, sample_rate, power, seed);
    case SourceKind::CwTone: return gen_cw(n, spec.carrier_offset, sample_rate, power, spec.phase);
    }
    throw std::invalid_argument("unknown source kind");
}

} // namespace cyclomon

#endif // CYCLOMON_SIGGEN_HPP
