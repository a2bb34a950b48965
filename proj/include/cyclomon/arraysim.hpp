#ifndef CYCLOMON_ARRAYSIM_HPP
#define CYCLOMON_ARRAYSIM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include <cyclomon/rng.hpp>
#include <cyclomon/siggen.hpp>
#include <cyclomon/sky.hpp>

namespace cyclomon {

inline constexpr double speed_of_light = 299792458.0; // m/s

using CVector   = Eigen::VectorXcd;
using CMatrix   = Eigen::MatrixXcd;
/// Antenna-major sample storage: row m is the series of antenna m.
using SampleMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct AntennaPosition {
    double x = 0.0; // m
    double y = 0.0; // m
    friend bool operator==(const AntennaPosition&, const AntennaPosition&) = default;
};

struct ArrayGeometry {
    std::vector<AntennaPosition> positions;
    double                       reference_freq = 0.0; // Hz

    [[nodiscard]] std::size_t size() const noexcept { return positions.size(); }
    [[nodiscard]] double      wavelength() const noexcept { return speed_of_light / reference_freq; }

    void validate() const {
        if (positions.size() < 2) {
            throw std::invalid_argument("array needs at least two antennas");
        }
        if (!(reference_freq > 0.0)) {
            throw std::invalid_argument("reference frequency must be positive");
        }
        for (std::size_t a = 0; a < positions.size(); ++a) {
            for (std::size_t b = a + 1; b < positions.size(); ++b) {
                if (positions[a] == positions[b]) {
                    throw std::invalid_argument(fmt::format("antennas {} and {} share a position", a, b));
                }
            }
        }
    }
};

/**
 * Pseudo-random layout inside a disk whose diameter is `aperture_wavelengths`
 * wavelengths at `reference_freq`. Positions keep a half-wavelength minimum
 * spacing. Deterministic in `seed`.
 */
[[nodiscard]] inline ArrayGeometry random_geometry(std::size_t n_antennas, double aperture_wavelengths, double reference_freq, std::uint64_t seed) {
    if (n_antennas < 2) {
        throw std::invalid_argument("array needs at least two antennas");
    }
    if (!(reference_freq > 0.0) || !(aperture_wavelengths > 0.0)) {
        throw std::invalid_argument("aperture and reference frequency must be positive");
    }
    const double  lambda   = speed_of_light / reference_freq;
    const double  radius   = 0.5 * aperture_wavelengths * lambda;
    const double  min_sep  = 0.5 * lambda;
    Xoshiro256pp  rng(seed);
    ArrayGeometry geom{{}, reference_freq};
    geom.positions.reserve(n_antennas);

    std::size_t attempts = 0;
    while (geom.positions.size() < n_antennas) {
        if (++attempts > 1000000) {
            throw std::invalid_argument("aperture too small for the requested antenna count");
        }
        const double x = radius * (2.0 * rng.uniform01() - 1.0);
        const double y = radius * (2.0 * rng.uniform01() - 1.0);
        if (x * x + y * y > radius * radius) {
            continue;
        }
        const bool crowded = std::any_of(geom.positions.begin(), geom.positions.end(), [&](const AntennaPosition& p) { return std::hypot(p.x - x, p.y - y) < min_sep; });
        if (!crowded) {
            geom.positions.push_back({x, y});
        }
    }
    return geom;
}

/// Narrowband plane-wave signature: exp(-j 2 pi (f0/c)(x l + y m)) per antenna.
[[nodiscard]] inline CVector steering_vector(const ArrayGeometry& geom, DirectionLM dir) {
    if (!dir.visible()) {
        throw std::invalid_argument(fmt::format("direction ({}, {}) is outside the unit disk", dir.l, dir.m));
    }
    CVector      a(static_cast<Eigen::Index>(geom.size()));
    const double k = geom.reference_freq / speed_of_light;
    for (std::size_t i = 0; i < geom.size(); ++i) {
        const double cycles = k * (geom.positions[i].x * dir.l + geom.positions[i].y * dir.m);
        const double angle  = -2.0 * std::numbers::pi * cycles;
        a[static_cast<Eigen::Index>(i)] = {std::cos(angle), std::sin(angle)};
    }
    return a;
}

struct Scene {
    ArrayGeometry           geometry;
    std::vector<SourceSpec> sources;
    std::size_t             n_samples          = 0;
    double                  sample_rate        = 1.0; // Hz
    double                  system_noise_power = 1.0;
    std::uint64_t           seed               = 0;
    double                  t0                 = 0.0; // s, start time of the snapshot

    void validate() const {
        geometry.validate();
        if (n_samples < 1) {
            throw std::invalid_argument("n_samples must be at least 1");
        }
        if (!(sample_rate > 0.0)) {
            throw std::invalid_argument("sample_rate must be positive");
        }
        if (!(system_noise_power > 0.0)) {
            throw std::invalid_argument("system_noise_power must be positive");
        }
        for (const auto& s : sources) {
            s.validate(sample_rate);
        }
    }
};

struct ArraySnapshot {
    SampleMatrix data; // M x N
    double       sample_rate = 1.0;
    double       t0          = 0.0;

    [[nodiscard]] std::size_t antennas() const noexcept { return static_cast<std::size_t>(data.rows()); }
    [[nodiscard]] std::size_t samples() const noexcept { return static_cast<std::size_t>(data.cols()); }
};

inline constexpr std::size_t motion_block_samples = 256;

struct SynthesisOptions {
    bool system_noise = true;
};

/// Stream index reserved for system noise; sources use their own `seed`.
inline constexpr std::uint64_t noise_stream = 0xffff'ffff'ffff'fff1ULL;

/**
 * Array data z = sum_s a(dir_s(t)) s(t) + n(t). Moving sources hold their
 * direction constant over blocks of `motion_block_samples`, evaluated at the
 * block centre. Source waveforms are seeded by derive_seed(scene.seed,
 * source.seed) and system noise of antenna m by derive_seed(noise seed, m).
 */
[[nodiscard]] inline ArraySnapshot synthesize(const Scene& scene, SynthesisOptions options = {}) {
    scene.validate();
    const auto M  = static_cast<Eigen::Index>(scene.geometry.size());
    const auto N  = static_cast<Eigen::Index>(scene.n_samples);
    const double fs = scene.sample_rate;

    ArraySnapshot snap{SampleMatrix::Zero(M, N), fs, scene.t0};

    for (const auto& source : scene.sources) {
        const double t_end = scene.t0 + static_cast<double>(N) / fs;
        // The visible disk is convex, so checking both ends covers a linear path.
        if (!source.trajectory.at(scene.t0).visible() || !source.trajectory.at(t_end).visible()) {
            const auto& tr = source.trajectory;
            const double t = disk_exit_time(tr.start, tr.rate_l, tr.rate_m, 0.0, scene.t0).value_or(t_end);
            throw TrajectoryError(fmt::format("{} source leaves the visible hemisphere at t={} s", to_string(source.kind), t), t);
        }
        const ComplexSeries wave = generate(source, scene.n_samples, fs, derive_seed(scene.seed, source.seed), scene.system_noise_power);

        if (source.trajectory.kind == TrajectoryKind::Fixed) {
            const CVector a = steering_vector(scene.geometry, source.trajectory.start);
            for (Eigen::Index m = 0; m < M; ++m) {
                for (Eigen::Index k = 0; k < N; ++k) {
                    snap.data(m, k) += a[m] * wave.samples[static_cast<std::size_t>(k)];
                }
            }
            continue;
        }
        for (Eigen::Index begin = 0; begin < N; begin += static_cast<Eigen::Index>(motion_block_samples)) {
            const Eigen::Index end      = std::min<Eigen::Index>(N, begin + static_cast<Eigen::Index>(motion_block_samples));
            const double       t_centre = scene.t0 + 0.5 * static_cast<double>(begin + end) / fs;
            const DirectionLM  dir      = source.trajectory.at(t_centre);
            if (!dir.visible()) {
                throw TrajectoryError(fmt::format("{} source leaves the visible hemisphere at t={} s", to_string(source.kind), t_centre), t_centre);
            }
            const CVector a = steering_vector(scene.geometry, dir);
            for (Eigen::Index m = 0; m < M; ++m) {
                for (Eigen::Index k = begin; k < end; ++k) {
                    snap.data(m, k) += a[m] * wave.samples[static_cast<std::size_t>(k)];
                }
            }
        }
    }

    if (options.system_noise) {
        const std::uint64_t noise_seed = derive_seed(scene.seed, noise_stream);
        for (Eigen::Index m = 0; m < M; ++m) {
            const ComplexSeries noise = gen_noise(scene.n_samples, scene.system_noise_power, derive_seed(noise_seed, static_cast<std::uint64_t>(m)), fs);
            for (Eigen::Index k = 0; k < N; ++k) {
                snap.data(m, k) += noise.samples[static_cast<std::size_t>(k)];
            }
        }
    }
    return snap;
}

} // namespace cyclomon

#endif // CYCLOMON_ARRAYSIM_HPP
