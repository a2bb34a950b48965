#ifndef CYCLOMON_SKY_HPP
#define CYCLOMON_SKY_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace cyclomon {

/// Direction cosines of a sky direction projected on the array plane.
struct DirectionLM {
    double l = 0.0;
    double m = 0.0;

    [[nodiscard]] bool visible() const noexcept { return l * l + m * m <= 1.0; }
    [[nodiscard]] DirectionLM operator-() const noexcept { return {-l, -m}; }
    friend bool operator==(const DirectionLM&, const DirectionLM&) = default;
};

/// Separation measured in the (l, m) plane. All gates, exclusion radii and
/// uncertainty radii in the project use this metric.
[[nodiscard]] inline double lm_distance(DirectionLM a, DirectionLM b) noexcept { return std::hypot(a.l - b.l, a.m - b.m); }

enum class TrajectoryKind { Fixed, LinearLM };

struct TrajectorySpec {
    TrajectoryKind kind = TrajectoryKind::Fixed;
    DirectionLM    start{};
    double         rate_l = 0.0; // 1/s
    double         rate_m = 0.0; // 1/s

    static TrajectorySpec fixed(DirectionLM dir) { return {TrajectoryKind::Fixed, dir, 0.0, 0.0}; }
    static TrajectorySpec linear(DirectionLM start, double dl, double dm) { return {TrajectoryKind::LinearLM, start, dl, dm}; }

    [[nodiscard]] DirectionLM at(double t) const noexcept {
        if (kind == TrajectoryKind::Fixed) {
            return start;
        }
        return {start.l + rate_l * t, start.m + rate_m * t};
    }
};

/**
 * Earliest time t >= t_from at which p(t) = origin + velocity * (t - t_ref)
 * leaves the unit disk, or nullopt if it never does. Returns t_from when the
 * point is already outside.
 */
[[nodiscard]] inline std::optional<double> disk_exit_time(DirectionLM origin, double vl, double vm, double t_ref, double t_from) noexcept {
    const auto at = [&](double t) { return DirectionLM{origin.l + vl * (t - t_ref), origin.m + vm * (t - t_ref)}; };
    if (!at(t_from).visible()) {
        return t_from;
    }
    const double a = vl * vl + vm * vm;
    if (a == 0.0) {
        return std::nullopt;
    }
    // |q + v s|^2 = 1 with q = p(t_from), s = t - t_from; q is inside so one root is >= 0.
    const DirectionLM q = at(t_from);
    const double      b = 2.0 * (q.l * vl + q.m * vm);
    const double      c = q.l * q.l + q.m * q.m - 1.0;
    const double      s = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
    return t_from + s;
}

/// Raised when a trajectory leaves the visible hemisphere during synthesis.
class TrajectoryError : public std::runtime_error {
public:
    TrajectoryError(const std::string& what, double time) : std::runtime_error(what), _time(time) {}
    [[nodiscard]] double time() const noexcept { return _time; }

private:
    double _time;
};

} // namespace cyclomon

#endif // CYCLOMON_SKY_HPP
