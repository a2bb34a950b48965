#ifndef CYCLOMON_IMAGING_HPP
#define CYCLOMON_IMAGING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include <cyclomon/arraysim.hpp>
#include <cyclomon/cyclospec.hpp>
#include <cyclomon/stats.hpp>

namespace cyclomon {

/// Regular (l, m) pixel grid; pixel (i, j) sits at (l_at(i), m_at(j)).
struct SkymapGrid {
    double      l_min = -1.0;
    double      l_max = 1.0;
    double      m_min = -1.0;
    double      m_max = 1.0;
    std::size_t n_l   = 128;
    std::size_t n_m   = 128;

    void validate() const {
        for (double v : {l_min, l_max, m_min, m_max}) {
            if (!(v >= -1.0 && v <= 1.0)) {
                throw std::invalid_argument("skymap bounds must lie in [-1, 1]");
            }
        }
        if (!(l_min < l_max) || !(m_min < m_max)) {
            throw std::invalid_argument("skymap bounds must be increasing");
        }
        if (n_l < 2 || n_m < 2) {
            throw std::invalid_argument("skymap needs at least 2 pixels per axis");
        }
    }

    [[nodiscard]] double l_step() const noexcept { return (l_max - l_min) / static_cast<double>(n_l - 1); }
    [[nodiscard]] double m_step() const noexcept { return (m_max - m_min) / static_cast<double>(n_m - 1); }
    [[nodiscard]] double l_at(std::size_t i) const noexcept { return l_min + static_cast<double>(i) * l_step(); }
    [[nodiscard]] double m_at(std::size_t j) const noexcept { return m_min + static_cast<double>(j) * m_step(); }
    [[nodiscard]] DirectionLM at(std::size_t i, std::size_t j) const noexcept { return {l_at(i), m_at(j)}; }
    [[nodiscard]] bool        masked(std::size_t i, std::size_t j) const noexcept { return !at(i, j).visible(); }

    /// Fractional pixel coordinates of a direction.
    [[nodiscard]] std::pair<double, double> pixel_coords(DirectionLM d) const noexcept { return {(d.l - l_min) / l_step(), (d.m - m_min) / m_step()}; }

    friend bool operator==(const SkymapGrid&, const SkymapGrid&) = default;
};

enum class SkymapKind { Classical, Cyclic, ConjugateCyclic };

inline const char* to_string(SkymapKind kind) noexcept {
    switch (kind) {
    case SkymapKind::Classical: return "classical";
    case SkymapKind::Cyclic: return "cyclic";
    case SkymapKind::ConjugateCyclic: return "conjugate_cyclic";
    }
    return "?";
}

struct Skymap {
    SkymapGrid      grid;
    Eigen::MatrixXd power; // n_l x n_m
    SkymapKind      kind  = SkymapKind::Classical;
    double          alpha = 0.0;
    std::size_t     lag   = 0;

    [[nodiscard]] double max() const { return power.maxCoeff(); }
};

namespace detail {

template<typename PixelFn>
Eigen::MatrixXd render(const SkymapGrid& grid, PixelFn&& pixel) {
    Eigen::MatrixXd power = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.n_l), static_cast<Eigen::Index>(grid.n_m));
    for (std::size_t i = 0; i < grid.n_l; ++i) {
        for (std::size_t j = 0; j < grid.n_m; ++j) {
            const DirectionLM d = grid.at(i, j);
            if (d.visible()) {
                power(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pixel(d);
            }
        }
    }
    return power;
}

inline void require_dims(const CMatrix& R, const ArrayGeometry& geom) {
    const auto M = static_cast<Eigen::Index>(geom.size());
    if (R.rows() != M || R.cols() != M) {
        throw std::invalid_argument(fmt::format("correlation matrix is {}x{} but the array has {} antennas", R.rows(), R.cols(), M));
    }
}

} // namespace detail

/// Beamformed power a^H R a / M^2; a unit point source peaks at 1.
[[nodiscard]] inline Skymap skymap(const CorrMatrix& R, const ArrayGeometry& geom, const SkymapGrid& grid) {
    grid.validate();
    detail::require_dims(R.values, geom);
    const double norm = static_cast<double>(geom.size() * geom.size());
    Skymap       map{grid, {}, SkymapKind::Classical, 0.0, 0};
    map.power = detail::render(grid, [&](DirectionLM d) {
        const CVector a = steering_vector(geom, d);
        return std::max(0.0, a.dot(R.values * a).real() / norm);
    });
    return map;
}

/**
 * Magnitude of the beamformed cyclic matrix. The ordinary cyclic matrix uses
 * |a^H R a|; the conjugate one transforms like a a^T, so its matched form is
 * |a^H R conj(a)|. Both normalised by M^2.
 */
[[nodiscard]] inline Skymap cyclic_skymap(const CyclicCorrMatrix& R, const ArrayGeometry& geom, const SkymapGrid& grid) {
    grid.validate();
    detail::require_dims(R.values, geom);
    const double norm = static_cast<double>(geom.size() * geom.size());
    Skymap       map{grid, {}, R.conjugate ? SkymapKind::ConjugateCyclic : SkymapKind::Cyclic, R.alpha, R.lag};
    map.power = detail::render(grid, [&](DirectionLM d) {
        const CVector a = steering_vector(geom, d);
        const cplx    q = R.conjugate ? a.dot(R.values * a.conjugate()) : a.dot(R.values * a);
        return std::abs(q) / norm;
    });
    return map;
}

struct SkyPeak {
    DirectionLM direction;
    double      power = 0.0;
    std::size_t i     = 0; // pixel of the local maximum
    std::size_t j     = 0;
};

namespace detail {

/// Stationary point of the least-squares quadratic through a 3x3 patch.
/// Returns false when the patch is not a proper maximum.
inline bool refine_quadratic(const double (&f)[3][3], double& dx, double& dy, double& value) {
    double sx = 0, sy = 0, sxy = 0, edge_x = 0, mid_x = 0, edge_y = 0, mid_y = 0, total = 0;
    for (int a = -1; a <= 1; ++a) {
        for (int b = -1; b <= 1; ++b) {
            const double v = f[a + 1][b + 1];
            sx += a * v;
            sy += b * v;
            sxy += a * b * v;
            (a == 0 ? mid_x : edge_x) += v;
            (b == 0 ? mid_y : edge_y) += v;
            total += v;
        }
    }
    const double cx  = sx / 6.0;
    const double cy  = sy / 6.0;
    const double cxy = sxy / 4.0;
    const double cxx = (edge_x - 2.0 * mid_x) / 6.0;
    const double cyy = (edge_y - 2.0 * mid_y) / 6.0;
    const double c0  = total / 9.0 - 2.0 / 3.0 * (cxx + cyy);
    const double det = 4.0 * cxx * cyy - cxy * cxy;
    if (!(cxx < 0.0) || !(det > 0.0)) {
        return false;
    }
    dx = (-2.0 * cyy * cx + cxy * cy) / det;
    dy = (-2.0 * cxx * cy + cxy * cx) / det;
    if (std::abs(dx) > 1.0 || std::abs(dy) > 1.0) {
        return false;
    }
    value = c0 + cx * dx + cy * dy + cxx * dx * dx + cyy * dy * dy + cxy * dx * dy;
    return true;
}

} // namespace detail

inline constexpr double peak_mad_factor = 5.0;

/**
 * Local maxima (8-neighbourhood) above median + 5 * scaled MAD of the
 * unmasked pixels, refined by a quadratic fit over the 3x3 neighbourhood,
 * strongest first. Plateaus yield one maximum (the first in raster order).
 */
[[nodiscard]] inline std::vector<SkyPeak> locate_peaks(const Skymap& map, std::size_t max_peaks) {
    if (max_peaks < 1) {
        throw std::invalid_argument("max_peaks must be at least 1");
    }
    const SkymapGrid& g = map.grid;
    const auto        P = [&](std::size_t i, std::size_t j) { return map.power(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };

    std::vector<double> unmasked;
    for (std::size_t i = 0; i < g.n_l; ++i) {
        for (std::size_t j = 0; j < g.n_m; ++j) {
            if (!g.masked(i, j)) {
                unmasked.push_back(P(i, j));
            }
        }
    }
    if (unmasked.empty()) {
        return {};
    }
    const double threshold = robust_threshold(unmasked, peak_mad_factor);

    std::vector<SkyPeak> peaks;
    for (std::size_t i = 0; i < g.n_l; ++i) {
        for (std::size_t j = 0; j < g.n_m; ++j) {
            const double v = P(i, j);
            if (g.masked(i, j) || !(v > threshold)) {
                continue;
            }
            bool is_max   = true;
            bool interior = i > 0 && j > 0 && i + 1 < g.n_l && j + 1 < g.n_m;
            for (int a = -1; a <= 1 && is_max; ++a) {
                for (int b = -1; b <= 1; ++b) {
                    if (a == 0 && b == 0) {
                        continue;
                    }
                    const auto ni = static_cast<std::ptrdiff_t>(i) + a;
                    const auto nj = static_cast<std::ptrdiff_t>(j) + b;
                    if (ni < 0 || nj < 0 || ni >= static_cast<std::ptrdiff_t>(g.n_l) || nj >= static_cast<std::ptrdiff_t>(g.n_m)) {
                        continue;
                    }
                    const double w       = P(static_cast<std::size_t>(ni), static_cast<std::size_t>(nj));
                    const bool   earlier = a < 0 || (a == 0 && b < 0);
                    if ((earlier && !(v > w)) || (!earlier && !(v >= w))) {
                        is_max = false;
                        break;
                    }
                    if (g.masked(static_cast<std::size_t>(ni), static_cast<std::size_t>(nj))) {
                        interior = false;
                    }
                }
            }
            if (!is_max) {
                continue;
            }
            SkyPeak peak{g.at(i, j), v, i, j};
            if (interior) {
                double f[3][3];
                for (int a = -1; a <= 1; ++a) {
                    for (int b = -1; b <= 1; ++b) {
                        f[a + 1][b + 1] = P(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + a), static_cast<std::size_t>(static_cast<std::ptrdiff_t>(j) + b));
                    }
                }
                double dx = 0, dy = 0, value = v;
                if (detail::refine_quadratic(f, dx, dy, value)) {
                    const DirectionLM refined{g.l_at(i) + dx * g.l_step(), g.m_at(j) + dy * g.m_step()};
                    if (refined.visible()) {
                        peak.direction = refined;
                        peak.power     = std::max(value, v);
                    }
                }
            }
            peaks.push_back(peak);
        }
    }
    std::stable_sort(peaks.begin(), peaks.end(), [](const SkyPeak& a, const SkyPeak& b) { return a.power > b.power; });
    if (peaks.size() > max_peaks) {
        peaks.resize(max_peaks);
    }
    return peaks;
}

} // namespace cyclomon

#endif // CYCLOMON_IMAGING_HPP
