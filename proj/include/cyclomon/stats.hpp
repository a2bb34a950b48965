#ifndef CYCLOMON_STATS_HPP
#define CYCLOMON_STATS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace cyclomon {

[[nodiscard]] inline double median(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median of an empty set");
    }
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (values.size() % 2 == 1) {
        return *mid;
    }
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

/// Normal-consistent scale of the median absolute deviation.
inline constexpr double mad_to_sigma = 1.4826;

/// Median absolute deviation, scaled by `mad_to_sigma` so that it estimates
/// the standard deviation of Gaussian data.
[[nodiscard]] inline double scaled_mad(std::span<const double> values, double centre) {
    std::vector<double> dev(values.size());
    std::transform(values.begin(), values.end(), dev.begin(), [centre](double v) { return std::abs(v - centre); });
    return mad_to_sigma * median(std::move(dev));
}

/// median + k * scaled MAD.
[[nodiscard]] inline double robust_threshold(std::span<const double> values, double k) {
    const double med = median(std::vector<double>(values.begin(), values.end()));
    return med + k * scaled_mad(values, med);
}

} // namespace cyclomon

#endif // CYCLOMON_STATS_HPP
