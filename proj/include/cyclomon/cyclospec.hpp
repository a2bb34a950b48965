#ifndef CYCLOMON_CYCLOSPEC_HPP
#define CYCLOMON_CYCLOSPEC_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>
#include <fmt/format.h>

#include <cyclomon/arraysim.hpp>
#include <cyclomon/stats.hpp>

namespace cyclomon {

/// Finite-sample array correlation matrix (1/N) sum_k z[k] z[k]^H.
struct CorrMatrix {
    CMatrix     values;
    std::size_t n_samples = 0;
};

/**
 * Cyclic correlation matrix at cyclic frequency `alpha`:
 *
 *   R[i,j] = 1/(N-lag) * sum_k z_i[k+lag] * z_j[k]^(*) * exp(-j 2 pi alpha k / fs)
 *
 * where (*) is complex conjugation for the ordinary matrix and is dropped for
 * the conjugate matrix. `lag` = 0 is the zero-lag statistic.
 */
struct CyclicCorrMatrix {
    CMatrix     values;
    double      alpha     = 0.0; // Hz
    bool        conjugate = false;
    std::size_t n_samples = 0;
    std::size_t lag       = 0; // samples
};

/// Frobenius norm of the cyclic matrix on a grid of cyclic frequencies.
struct CyclicSpectrum {
    std::vector<double> alphas;
    std::vector<double> magnitudes;
    bool                conjugate = false;
    std::size_t         lag       = 0;
};

struct CyclicFeature {
    double alpha     = 0.0;
    double magnitude = 0.0;
    bool   conjugate = false;
    std::size_t lag  = 0;
};

namespace detail {

/// Plain time average of z_i[k+lag] z_j[k]^(*) w[k]. Each product is written
/// out component-wise so that the mirrored (j, i, -alpha) sum is the exact
/// complex conjugate of this one.
inline CMatrix accumulate_products(const SampleMatrix& z, std::size_t lag, bool conjugate, const std::vector<cplx>* weights) {
    const Eigen::Index M     = z.rows();
    const std::size_t  N     = static_cast<std::size_t>(z.cols());
    const std::size_t  count = N - lag;
    CMatrix            R(M, M);

    for (Eigen::Index i = 0; i < M; ++i) {
        const cplx* zi = z.row(i).data() + lag;
        for (Eigen::Index j = 0; j < M; ++j) {
            const cplx* zj    = z.row(j).data();
            double      sum_r = 0.0;
            double      sum_i = 0.0;
            for (std::size_t k = 0; k < count; ++k) {
                const double ar = zi[k].real(), ai = zi[k].imag();
                const double br = zj[k].real(), bi = zj[k].imag();
                double       ur, ui;
                if (conjugate) {
                    ur = ar * br - ai * bi;
                    ui = ar * bi + ai * br;
                } else {
                    ur = ar * br + ai * bi;
                    ui = ai * br - ar * bi;
                }
                if (weights != nullptr) {
                    const double wr = (*weights)[k].real(), wi = (*weights)[k].imag();
                    sum_r += ur * wr - ui * wi;
                    sum_i += ur * wi + ui * wr;
                } else {
                    sum_r += ur;
                    sum_i += ui;
                }
            }
            R(i, j) = {sum_r / static_cast<double>(count), sum_i / static_cast<double>(count)};
        }
    }
    return R;
}

inline void require_lag(const ArraySnapshot& snap, std::size_t lag) {
    if (snap.samples() == 0 || lag >= snap.samples()) {
        throw std::invalid_argument(fmt::format("lag {} needs more than {} samples", lag, snap.samples()));
    }
}

inline void require_alpha(const ArraySnapshot& snap, double alpha) {
    if (!(std::abs(alpha) < snap.sample_rate)) {
        throw std::invalid_argument(fmt::format("cyclic frequency {} Hz outside (-fs, fs)", alpha));
    }
}

/// Integer DFT bin of `alpha` for a length-n transform, if it lands on one.
inline std::optional<long long> alpha_bin(double alpha, double sample_rate, std::size_t n) {
    const double bin     = alpha * static_cast<double>(n) / sample_rate;
    const double rounded = std::round(bin);
    if (std::abs(bin - rounded) > 1e-9 * std::max(1.0, std::abs(bin))) {
        return std::nullopt;
    }
    return static_cast<long long>(rounded);
}

/// RAII wrapper for a single in-place forward FFTW plan.
class ForwardFft {
public:
    explicit ForwardFft(std::size_t n) : _n(n) {
        _buffer = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        if (_buffer == nullptr) {
            throw std::bad_alloc();
        }
        _plan = fftw_plan_dft_1d(static_cast<int>(n), _buffer, _buffer, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    ForwardFft(const ForwardFft&)            = delete;
    ForwardFft& operator=(const ForwardFft&) = delete;
    ~ForwardFft() {
        fftw_destroy_plan(_plan);
        fftw_free(_buffer);
    }

    [[nodiscard]] std::span<cplx> data() noexcept { return {reinterpret_cast<cplx*>(_buffer), _n}; }
    void                          execute() noexcept { fftw_execute(_plan); }

private:
    std::size_t   _n;
    fftw_complex* _buffer = nullptr;
    fftw_plan     _plan   = nullptr;
};

/// For each (i, j) pair fill the FFT buffer with the lag product sequence,
/// transform, and hand the spectrum to `sink(i, j, spectrum)`.
template<typename Sink>
void for_each_pair_spectrum(const ArraySnapshot& snap, std::size_t lag, bool conjugate, Sink&& sink) {
    const std::size_t  N = snap.samples();
    const Eigen::Index M = snap.data.rows();
    ForwardFft         fft(N);
    auto               buf = fft.data();
    for (Eigen::Index i = 0; i < M; ++i) {
        const cplx* zi = snap.data.row(i).data() + lag;
        for (Eigen::Index j = 0; j < M; ++j) {
            const cplx* zj = snap.data.row(j).data();
            for (std::size_t k = 0; k < N - lag; ++k) {
                buf[k] = conjugate ? zi[k] * zj[k] : zi[k] * std::conj(zj[k]);
            }
            std::fill(buf.begin() + static_cast<std::ptrdiff_t>(N - lag), buf.end(), cplx{});
            fft.execute();
            sink(i, j, std::span<const cplx>(buf));
        }
    }
}

} // namespace detail

[[nodiscard]] inline CorrMatrix corr_matrix(const ArraySnapshot& snap) {
    detail::require_lag(snap, 0);
    return {detail::accumulate_products(snap.data, 0, false, nullptr), snap.samples()};
}

/// Direct time-average estimator. At alpha = 0, lag = 0, non-conjugate it
/// follows the same arithmetic path as corr_matrix().
[[nodiscard]] inline CyclicCorrMatrix cyclic_corr_matrix(const ArraySnapshot& snap, double alpha, bool conjugate, std::size_t lag = 0) {
    detail::require_lag(snap, lag);
    detail::require_alpha(snap, alpha);
    const std::size_t count = snap.samples() - lag;
    CyclicCorrMatrix  out{{}, alpha, conjugate, snap.samples(), lag};
    if (alpha == 0.0) {
        out.values = detail::accumulate_products(snap.data, lag, conjugate, nullptr);
        return out;
    }
    std::vector<cplx> weights(count);
    const double      cycles_per_sample = -alpha / snap.sample_rate;
    for (std::size_t k = 0; k < count; ++k) {
        weights[k] = detail::unit_phasor(cycles_per_sample * static_cast<double>(k));
    }
    out.values = detail::accumulate_products(snap.data, lag, conjugate, &weights);
    return out;
}

/// True when every alpha sits on a DFT bin of the snapshot length, so the
/// batch FFT path applies.
[[nodiscard]] inline bool fft_aligned(const ArraySnapshot& snap, std::span<const double> alphas) {
    return std::all_of(alphas.begin(), alphas.end(), [&](double a) { return detail::alpha_bin(a, snap.sample_rate, snap.samples()).has_value(); });
}

/**
 * Batch estimator: one FFT per antenna pair yields the cyclic matrices at
 * every bin-aligned alpha at once. Matches cyclic_corr_matrix() to rounding.
 */
[[nodiscard]] inline std::vector<CyclicCorrMatrix> cyclic_corr_matrices_fft(const ArraySnapshot& snap, std::span<const double> alphas, bool conjugate, std::size_t lag = 0) {
    detail::require_lag(snap, lag);
    const std::size_t        N = snap.samples();
    const Eigen::Index       M = snap.data.rows();
    std::vector<std::size_t> bins;
    std::vector<CyclicCorrMatrix> out;
    for (double a : alphas) {
        detail::require_alpha(snap, a);
        const auto bin = detail::alpha_bin(a, snap.sample_rate, N);
        if (!bin) {
            throw std::invalid_argument(fmt::format("alpha {} Hz is not on the fs/N grid", a));
        }
        const auto n = static_cast<long long>(N);
        bins.push_back(static_cast<std::size_t>(((*bin % n) + n) % n));
        out.push_back({CMatrix(M, M), a, conjugate, N, lag});
    }
    const double scale = 1.0 / static_cast<double>(N - lag);
    detail::for_each_pair_spectrum(snap, lag, conjugate, [&](Eigen::Index i, Eigen::Index j, std::span<const cplx> spec) {
        for (std::size_t a = 0; a < bins.size(); ++a) {
            out[a].values(i, j) = spec[bins[a]] * scale;
        }
    });
    return out;
}

enum class SpectrumMethod { Auto, Direct, Fft };

[[nodiscard]] inline CyclicSpectrum cyclic_spectrum(const ArraySnapshot& snap, std::span<const double> alphas, bool conjugate, std::size_t lag = 0, SpectrumMethod method = SpectrumMethod::Auto) {
    if (alphas.empty()) {
        throw std::invalid_argument("cyclic frequency grid is empty");
    }
    if (std::adjacent_find(alphas.begin(), alphas.end(), [](double a, double b) { return !(a < b); }) != alphas.end()) {
        throw std::invalid_argument("cyclic frequency grid must be strictly increasing");
    }
    detail::require_lag(snap, lag);
    for (double a : alphas) {
        detail::require_alpha(snap, a);
    }
    CyclicSpectrum out{{alphas.begin(), alphas.end()}, std::vector<double>(alphas.size(), 0.0), conjugate, lag};

    const bool use_fft = method == SpectrumMethod::Fft || (method == SpectrumMethod::Auto && fft_aligned(snap, alphas));
    if (!use_fft) {
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            out.magnitudes[a] = cyclic_corr_matrix(snap, alphas[a], conjugate, lag).values.norm();
        }
        return out;
    }

    const std::size_t        N = snap.samples();
    std::vector<std::size_t> bins;
    for (double a : alphas) {
        const auto bin = detail::alpha_bin(a, snap.sample_rate, N);
        if (!bin) {
            throw std::invalid_argument(fmt::format("alpha {} Hz is not on the fs/N grid", a));
        }
        const auto n = static_cast<long long>(N);
        bins.push_back(static_cast<std::size_t>(((*bin % n) + n) % n));
    }
    std::vector<double> energy(alphas.size(), 0.0);
    detail::for_each_pair_spectrum(snap, lag, conjugate, [&](Eigen::Index, Eigen::Index, std::span<const cplx> spec) {
        for (std::size_t a = 0; a < bins.size(); ++a) {
            energy[a] += std::norm(spec[bins[a]]);
        }
    });
    const double scale = 1.0 / static_cast<double>(N - lag);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        out.magnitudes[a] = std::sqrt(energy[a]) * scale;
    }
    return out;
}

/// Inclusive grid min, min+step, ... up to max.
[[nodiscard]] inline std::vector<double> alpha_grid(double min, double max, double step) {
    if (!(step > 0.0) || !(max >= min)) {
        throw std::invalid_argument("alpha grid needs step > 0 and max >= min");
    }
    const auto          count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = min + static_cast<double>(i) * step;
    }
    return grid;
}

inline constexpr std::size_t min_detection_grid = 16;
inline constexpr double      detection_mad_factor = 5.0;

/**
 * Local maxima of the spectrum above median + 5 * scaled MAD, strongest
 * first. The alpha = 0 bin is skipped for the ordinary spectrum since every
 * signal with power contributes there.
 */
[[nodiscard]] inline std::vector<CyclicFeature> detect_cyclic_freqs(const CyclicSpectrum& spec) {
    const auto& mag = spec.magnitudes;
    if (mag.size() < min_detection_grid) {
        throw std::invalid_argument(fmt::format("detection needs at least {} grid points, got {}", min_detection_grid, mag.size()));
    }
    const double threshold = robust_threshold(mag, detection_mad_factor);
    const double half_step = 0.5 * (spec.alphas.back() - spec.alphas.front()) / static_cast<double>(spec.alphas.size() - 1);

    std::vector<CyclicFeature> found;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        if (!spec.conjugate && std::abs(spec.alphas[i]) < half_step) {
            continue;
        }
        const bool above_left  = i == 0 || mag[i] > mag[i - 1];
        const bool above_right = i + 1 == mag.size() || mag[i] >= mag[i + 1];
        if (above_left && above_right && mag[i] > threshold) {
            found.push_back({spec.alphas[i], mag[i], spec.conjugate, spec.lag});
        }
    }
    std::stable_sort(found.begin(), found.end(), [](const CyclicFeature& a, const CyclicFeature& b) { return a.magnitude > b.magnitude; });
    return found;
}

} // namespace cyclomon

#endif // CYCLOMON_CYCLOSPEC_HPP
