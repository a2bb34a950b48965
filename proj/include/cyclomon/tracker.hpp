#ifndef CYCLOMON_TRACKER_HPP
#define CYCLOMON_TRACKER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include <cyclomon/sky.hpp>

namespace cyclomon {

struct Detection {
    double      time      = 0.0; // s
    double      alpha     = 0.0; // Hz
    bool        conjugate = false;
    DirectionLM direction{};
    double      power = 0.0;
    std::size_t lag   = 0;
};

enum class MotionClass { Unclassified, Stationary, Slow, Fast };

inline const char* to_string(MotionClass c) noexcept {
    switch (c) {
    case MotionClass::Unclassified: return "unclassified";
    case MotionClass::Stationary: return "stationary";
    case MotionClass::Slow: return "slow";
    case MotionClass::Fast: return "fast";
    }
    return "?";
}

inline std::optional<MotionClass> motion_class_from_string(std::string_view s) noexcept {
    for (auto c : {MotionClass::Unclassified, MotionClass::Stationary, MotionClass::Slow, MotionClass::Fast}) {
        if (s == to_string(c)) {
            return c;
        }
    }
    return std::nullopt;
}

struct TrackerConfig {
    double      stationary_speed = 1e-5; // 1/s
    double      fast_speed       = 5e-3; // 1/s
    double      gate_factor      = 3.0;
    double      gate_min         = 0.01;
    double      alpha_tol        = 0.0; // Hz; the pipeline sets one alpha-grid step
    std::size_t drop_after       = 5;   // frames
    std::size_t min_points       = 5;

    void validate() const {
        if (!(stationary_speed >= 0.0) || !(fast_speed >= stationary_speed)) {
            throw std::invalid_argument("tracker speeds need 0 <= stationary_speed <= fast_speed");
        }
        if (!(gate_factor >= 0.0) || !(gate_min > 0.0) || !(alpha_tol >= 0.0)) {
            throw std::invalid_argument("tracker gate settings must be non-negative");
        }
        if (min_points < 2) {
            throw std::invalid_argument("min_points must be at least 2");
        }
    }
};

struct TrackPoint {
    double      time = 0.0;
    DirectionLM direction{};
    double      power = 0.0;
};

/// Degree-1 motion model: position(t) = (l0, m0) + rate * (t - t_ref).
struct MotionModel {
    double      t_ref        = 0.0;
    double      l0           = 0.0;
    double      m0           = 0.0;
    double      rate_l       = 0.0;
    double      rate_m       = 0.0;
    double      residual_rms = 0.0;
    std::size_t points       = 0;

    [[nodiscard]] DirectionLM position(double t) const noexcept { return {l0 + rate_l * (t - t_ref), m0 + rate_m * (t - t_ref)}; }
    [[nodiscard]] double      speed() const noexcept { return std::hypot(rate_l, rate_m); }
};

struct RfiTrack {
    std::uint64_t           id        = 0;
    double                  alpha     = 0.0;
    bool                    conjugate = false;
    std::size_t             lag       = 0;
    std::vector<TrackPoint> history;
    MotionClass             motion = MotionClass::Unclassified;
    MotionModel             model{};
    std::size_t             missed = 0; // consecutive frames without a detection
};

/// Least-squares line through (t, l) and (t, m), centred on the mean time.
[[nodiscard]] inline MotionModel fit_motion(std::span<const TrackPoint> history) {
    if (history.empty()) {
        throw std::invalid_argument("cannot fit an empty history");
    }
    const auto   n = static_cast<double>(history.size());
    MotionModel  fit;
    fit.points = history.size();
    double t_mean = 0, l_mean = 0, m_mean = 0;
    for (const auto& p : history) {
        t_mean += p.time;
        l_mean += p.direction.l;
        m_mean += p.direction.m;
    }
    t_mean /= n;
    l_mean /= n;
    m_mean /= n;
    double stt = 0, stl = 0, stm = 0;
    for (const auto& p : history) {
        const double dt = p.time - t_mean;
        stt += dt * dt;
        stl += dt * (p.direction.l - l_mean);
        stm += dt * (p.direction.m - m_mean);
    }
    fit.t_ref = t_mean;
    fit.l0    = l_mean;
    fit.m0    = m_mean;
    if (stt > 0.0) {
        fit.rate_l = stl / stt;
        fit.rate_m = stm / stt;
    }
    double ss = 0;
    for (const auto& p : history) {
        const DirectionLM q = fit.position(p.time);
        ss += (p.direction.l - q.l) * (p.direction.l - q.l) + (p.direction.m - q.m) * (p.direction.m - q.m);
    }
    fit.residual_rms = std::sqrt(ss / n);
    return fit;
}

[[nodiscard]] inline MotionClass class_for_speed(double speed, const TrackerConfig& cfg) noexcept {
    if (speed < cfg.stationary_speed) {
        return MotionClass::Stationary;
    }
    if (speed > cfg.fast_speed) {
        return MotionClass::Fast;
    }
    return MotionClass::Slow;
}

[[nodiscard]] inline MotionClass classify(const RfiTrack& track, const TrackerConfig& cfg) {
    if (track.history.size() < cfg.min_points) {
        return MotionClass::Unclassified;
    }
    return class_for_speed(fit_motion(track.history).speed(), cfg);
}

struct Prediction {
    DirectionLM           direction{};
    double                radius        = 0.0;
    bool                  below_horizon = false;
    std::optional<double> horizon_crossing; // s, set with below_horizon
};

/**
 * Extrapolated position and uncertainty radius at time t.
 *
 * Stationary tracks report the history mean with the RMS scatter about it.
 * Moving tracks use the fitted line; the radius is the fit residual RMS
 * scaled by (1 + horizon / history span), where horizon counts from the last
 * detection. A prediction that leaves the unit disk is flagged as set below
 * the horizon, with the crossing time and the crossing point.
 */
[[nodiscard]] inline Prediction predict(const RfiTrack& track, double t) {
    if (track.motion == MotionClass::Unclassified) {
        throw std::invalid_argument(fmt::format("track {} is not classified yet", track.id));
    }
    if (track.history.empty()) {
        throw std::invalid_argument("track has no history");
    }
    const MotionModel fit = fit_motion(track.history);
    Prediction        out;

    if (track.motion == MotionClass::Stationary) {
        double ss = 0;
        for (const auto& p : track.history) {
            ss += std::pow(p.direction.l - fit.l0, 2) + std::pow(p.direction.m - fit.m0, 2);
        }
        out.direction = {fit.l0, fit.m0};
        out.radius    = std::sqrt(ss / static_cast<double>(track.history.size()));
        return out;
    }

    const double t_first = track.history.front().time;
    const double t_last  = track.history.back().time;
    const double span    = t_last - t_first;
    const double horizon = std::max(0.0, t - t_last);
    const double growth  = span > 0.0 ? 1.0 + horizon / span : 1.0;
    out.direction        = fit.position(t);
    out.radius           = std::min(2.0, fit.residual_rms * growth);

    if (!out.direction.visible()) {
        out.below_horizon    = true;
        out.horizon_crossing = disk_exit_time({fit.l0, fit.m0}, fit.rate_l, fit.rate_m, fit.t_ref, std::min(t, t_last));
        DirectionLM rim      = fit.position(out.horizon_crossing.value_or(t));
        const double norm    = std::hypot(rim.l, rim.m);
        if (norm > 1.0) {
            rim = {rim.l / norm, rim.m / norm};
        }
        out.direction = rim;
    }
    return out;
}

/// Active tracks plus the id counter, published once per frame.
struct TrackSet {
    std::vector<RfiTrack> tracks;
    std::uint64_t         next_id = 1;
};

namespace detail {

/// Where association expects a track at time t, and the gate radius to use.
/// Unclassified tracks have no usable motion model yet (a rate fitted to a
/// few noisy points extrapolates badly), so they wait at the smoothed last
/// position rather than extrapolating.
inline std::pair<DirectionLM, double> association_target(const RfiTrack& track, double t, const TrackerConfig& cfg) {
    double uncertainty = 0.0;
    DirectionLM where  = track.history.back().direction;
    if (track.motion != MotionClass::Unclassified) {
        const Prediction p = predict(track, t);
        where              = p.direction;
        uncertainty        = p.radius;
    } else if (track.history.size() >= 3) {
        where = fit_motion(track.history).position(track.history.back().time);
    }
    return {where, std::max(cfg.gate_min, cfg.gate_factor * uncertainty)};
}

} // namespace detail

/**
 * One frame of greedy nearest-neighbour association. Candidate pairs need a
 * matching conjugate flag, |alpha difference| <= alpha_tol and a distance
 * under the track's gate; pairs are taken in order of (distance, track id,
 * detection index). Leftover detections open tracks; tracks that have missed
 * more than drop_after frames are retired.
 */
[[nodiscard]] inline TrackSet associate(TrackSet set, std::span<const Detection> detections, const TrackerConfig& cfg) {
    cfg.validate();
    if (detections.empty() && set.tracks.empty()) {
        return set;
    }
    for (const auto& d : detections) {
        if (d.time != detections.front().time) {
            throw std::invalid_argument("detections passed to associate() must share one frame time");
        }
        if (!d.direction.visible() || !(d.power >= 0.0)) {
            throw std::invalid_argument("detection direction must be visible and power non-negative");
        }
    }

    std::vector<std::tuple<double, std::uint64_t, std::size_t, std::size_t>> candidates; // distance, id, detection, track index
    if (!detections.empty()) {
        const double t = detections.front().time;
        for (std::size_t ti = 0; ti < set.tracks.size(); ++ti) {
            const RfiTrack& track = set.tracks[ti];
            if (!(t > track.history.back().time)) {
                continue;
            }
            const auto [where, gate] = detail::association_target(track, t, cfg);
            for (std::size_t di = 0; di < detections.size(); ++di) {
                const Detection& d = detections[di];
                if (d.conjugate != track.conjugate || std::abs(d.alpha - track.alpha) > cfg.alpha_tol) {
                    continue;
                }
                const double dist = lm_distance(where, d.direction);
                if (dist < gate) {
                    candidates.emplace_back(dist, track.id, di, ti);
                }
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<bool> track_used(set.tracks.size(), false);
    std::vector<bool> det_used(detections.size(), false);
    for (const auto& [dist, id, di, ti] : candidates) {
        if (track_used[ti] || det_used[di]) {
            continue;
        }
        track_used[ti] = det_used[di] = true;
        const Detection& d = detections[di];
        set.tracks[ti].history.push_back({d.time, d.direction, d.power});
        set.tracks[ti].missed = 0;
    }
    for (std::size_t ti = 0; ti < set.tracks.size(); ++ti) {
        if (!track_used[ti]) {
            ++set.tracks[ti].missed;
        }
    }
    std::erase_if(set.tracks, [&](const RfiTrack& t) { return t.missed > cfg.drop_after; });

    for (std::size_t di = 0; di < detections.size(); ++di) {
        if (det_used[di]) {
            continue;
        }
        const Detection& d = detections[di];
        RfiTrack         track;
        track.id        = set.next_id++;
        track.alpha     = d.alpha;
        track.conjugate = d.conjugate;
        track.lag       = d.lag;
        track.history.push_back({d.time, d.direction, d.power});
        set.tracks.push_back(std::move(track));
    }
    for (auto& track : set.tracks) {
        track.model  = fit_motion(track.history);
        track.motion = classify(track, cfg);
    }
    return set;
}

} // namespace cyclomon

#endif // CYCLOMON_TRACKER_HPP
