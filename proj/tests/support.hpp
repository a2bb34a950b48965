#ifndef CYCLOMON_TESTS_SUPPORT_HPP
#define CYCLOMON_TESTS_SUPPORT_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>

#include <unistd.h>

#include <cyclomon/arraysim.hpp>
#include <cyclomon/cyclospec.hpp>
#include <cyclomon/rng.hpp>

namespace testing_support {

using cyclomon::cplx;

/// M x N snapshot of unit-power complex Gaussian samples.
inline cyclomon::ArraySnapshot random_snapshot(std::size_t M, std::size_t N, std::uint64_t seed, double fs = 1.0e6) {
    cyclomon::Xoshiro256pp  rng(seed);
    cyclomon::ArraySnapshot snap;
    snap.sample_rate = fs;
    snap.data.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(N));
    for (Eigen::Index m = 0; m < snap.data.rows(); ++m) {
        for (Eigen::Index k = 0; k < snap.data.cols(); ++k) {
            snap.data(m, k) = rng.complex_gaussian();
        }
    }
    return snap;
}

/// Textbook estimator written independently of the library kernel:
/// (1/(N-lag)) sum_k z_i[k+lag] op(z_j[k]) exp(-j 2 pi alpha k / fs).
inline cyclomon::CMatrix oracle_cyclic(const cyclomon::ArraySnapshot& snap, double alpha, bool conjugate, std::size_t lag = 0) {
    const auto M = snap.data.rows();
    const auto N = static_cast<std::size_t>(snap.data.cols());
    cyclomon::CMatrix R = cyclomon::CMatrix::Zero(M, M);
    for (std::size_t k = 0; k + lag < N; ++k) {
        const cplx w = std::polar(1.0, -2.0 * std::numbers::pi * alpha * static_cast<double>(k) / snap.sample_rate);
        for (Eigen::Index i = 0; i < M; ++i) {
            for (Eigen::Index j = 0; j < M; ++j) {
                const cplx b = snap.data(j, static_cast<Eigen::Index>(k));
                R(i, j) += snap.data(i, static_cast<Eigen::Index>(k + lag)) * (conjugate ? b : std::conj(b)) * w;
            }
        }
    }
    return R / static_cast<double>(N - lag);
}

/// Independent N(0, sigma^2) draws in l and m.
inline cyclomon::DirectionLM gaussian_offset(cyclomon::Xoshiro256pp& rng, double sigma) {
    const cplx g = rng.complex_gaussian() * std::sqrt(2.0) * sigma;
    return {g.real(), g.imag()};
}

/// Fresh empty directory under the system temp dir, unique per process.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("cyclomon_test_" + std::to_string(::getpid())) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline double cosine(const cyclomon::CVector& a, const cyclomon::CVector& b) { return std::abs(a.dot(b)) / (a.norm() * b.norm()); }

} // namespace testing_support

#endif
