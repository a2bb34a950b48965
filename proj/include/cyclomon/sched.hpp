#ifndef CYCLOMON_SCHED_HPP
#define CYCLOMON_SCHED_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include <cyclomon/sky.hpp>
#include <cyclomon/tracker.hpp>

namespace cyclomon {

inline constexpr double sidereal_rate = 7.2921150e-5; // rad/s

struct EquatorialTarget {
    double ra  = 0.0; // rad
    double dec = 0.0; // rad
};

/// An astronomical program: a field, a band and a contiguous slot count.
struct Program {
    int              id = 0;
    EquatorialTarget target{};
    double           f_lo     = 0.0; // Hz
    double           f_hi     = 0.0; // Hz
    std::size_t      duration = 1;   // slots
    double           priority = 1.0;

    void validate() const {
        if (!(f_lo < f_hi)) {
            throw std::invalid_argument(fmt::format("program {}: f_lo must be below f_hi", id));
        }
        if (duration < 1) {
            throw std::invalid_argument(fmt::format("program {}: duration must be at least one slot", id));
        }
        if (!(priority > 0.0) || !std::isfinite(priority)) {
            throw std::invalid_argument(fmt::format("program {}: priority must be positive", id));
        }
    }
};

struct SiteModel {
    double latitude    = 0.0; // rad
    double slot_length = 1.0; // s
    double lst0        = 0.0; // rad, local sidereal time at slot 0
    double start_time  = 0.0; // s, slot 0 on the tracker clock

    void validate() const {
        if (!(std::abs(latitude) <= std::numbers::pi / 2)) {
            throw std::invalid_argument("site latitude must lie in [-pi/2, pi/2]");
        }
        if (!(slot_length > 0.0)) {
            throw std::invalid_argument("slot_length must be positive");
        }
    }

    [[nodiscard]] double slot_time(std::size_t slot) const noexcept { return start_time + static_cast<double>(slot) * slot_length; }
};

/**
 * Topocentric direction cosines of an equatorial target at the start of
 * `slot`, or nullopt when it is below the horizon. Uses hour angle
 * H = lst0 + slot * slot_length * sidereal_rate - ra and azimuth measured
 * from north through east, so l = cos(alt) sin(az), m = cos(alt) cos(az).
 */
[[nodiscard]] inline std::optional<DirectionLM> target_position(EquatorialTarget target, const SiteModel& site, std::size_t slot) {
    const double H       = site.lst0 + static_cast<double>(slot) * site.slot_length * sidereal_rate - target.ra;
    const double sin_dec = std::sin(target.dec), cos_dec = std::cos(target.dec);
    const double sin_lat = std::sin(site.latitude), cos_lat = std::cos(site.latitude);
    const double sin_alt = sin_dec * sin_lat + cos_dec * cos_lat * std::cos(H);
    if (sin_alt < 0.0) {
        return std::nullopt;
    }
    return DirectionLM{-cos_dec * std::sin(H), sin_dec * cos_lat - cos_dec * sin_lat * std::cos(H)};
}

/// Frequency band occupied by tracks whose cyclic signature matches.
struct BandRule {
    double alpha     = 0.0; // Hz
    bool   conjugate = false;
    double tolerance = 0.0; // Hz
    double f_lo      = -std::numeric_limits<double>::infinity();
    double f_hi      = std::numeric_limits<double>::infinity();
};

/// First matching rule wins; unmatched tracks occupy the whole band.
[[nodiscard]] inline std::pair<double, double> track_band(const RfiTrack& track, std::span<const BandRule> rules) noexcept {
    for (const auto& r : rules) {
        if (r.conjugate == track.conjugate && std::abs(r.alpha - track.alpha) <= r.tolerance) {
            return {r.f_lo, r.f_hi};
        }
    }
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
}

struct TrackForecast {
    DirectionLM direction{};
    double      radius = 0.0;
    double      f_lo   = -std::numeric_limits<double>::infinity();
    double      f_hi   = std::numeric_limits<double>::infinity();
};

[[nodiscard]] inline bool bands_overlap(double a_lo, double a_hi, double b_lo, double b_hi) noexcept { return a_lo < b_hi && b_lo < a_hi; }

/**
 * Probability-like corruption risk of a pointing. A track inside the hard
 * core (separation minus uncertainty below the exclusion radius) scores 1,
 * otherwise exp(-gap^2 / (2 excl^2)); tracks out of band score 0. Per-track
 * risks combine as 1 - prod(1 - r).
 */
[[nodiscard]] inline double corruption_risk(DirectionLM pointing, double f_lo, double f_hi, std::span<const TrackForecast> tracks, double exclusion_radius) {
    if (!pointing.visible()) {
        throw std::invalid_argument("pointing must be a visible direction");
    }
    if (!(exclusion_radius > 0.0)) {
        throw std::invalid_argument("exclusion radius must be positive");
    }
    double clear = 1.0;
    for (const auto& t : tracks) {
        if (!bands_overlap(t.f_lo, t.f_hi, f_lo, f_hi)) {
            continue;
        }
        const double gap  = lm_distance(pointing, t.direction) - t.radius;
        const double risk = gap < exclusion_radius ? 1.0 : std::exp(-(gap * gap) / (2.0 * exclusion_radius * exclusion_radius));
        clear *= 1.0 - risk;
    }
    return std::clamp(1.0 - clear, 0.0, 1.0);
}

/// Predictions of every classified track at time t that are above the horizon.
[[nodiscard]] inline std::vector<TrackForecast> forecast_tracks(std::span<const RfiTrack> tracks, double t, std::span<const BandRule> bands) {
    std::vector<TrackForecast> out;
    for (const auto& track : tracks) {
        if (track.motion == MotionClass::Unclassified) {
            continue;
        }
        const Prediction p = predict(track, t);
        if (p.below_horizon) {
            continue;
        }
        const auto [lo, hi] = track_band(track, bands);
        out.push_back({p.direction, p.radius, lo, hi});
    }
    return out;
}

enum class ScheduleMode { Greedy, Exact };

inline const char* to_string(ScheduleMode m) noexcept { return m == ScheduleMode::Greedy ? "greedy" : "exact"; }

inline constexpr std::size_t exact_max_slots    = 12;
inline constexpr std::size_t exact_max_programs = 6;

struct SchedulerConfig {
    double                lambda           = 1.0;
    double                risk_cap         = 0.5;
    double                exclusion_radius = 0.1;
    std::vector<BandRule> bands;
};

/// Per-(program, slot) pointing and risk. NaN risk marks an invisible target.
struct RiskTable {
    std::size_t                                        horizon = 0;
    std::vector<std::vector<double>>                   risk;     // [program][slot]
    std::vector<std::vector<std::optional<DirectionLM>>> pointing; // [program][slot]

    [[nodiscard]] bool visible(std::size_t p, std::size_t s) const noexcept { return !std::isnan(risk[p][s]); }
};

[[nodiscard]] inline RiskTable build_risk_table(std::span<const Program> programs, const SiteModel& site, std::size_t horizon, std::span<const RfiTrack> tracks, const SchedulerConfig& cfg) {
    site.validate();
    RiskTable table{horizon, std::vector<std::vector<double>>(programs.size(), std::vector<double>(horizon, std::numeric_limits<double>::quiet_NaN())),
                    std::vector<std::vector<std::optional<DirectionLM>>>(programs.size(), std::vector<std::optional<DirectionLM>>(horizon))};
    for (std::size_t s = 0; s < horizon; ++s) {
        const auto forecasts = forecast_tracks(tracks, site.slot_time(s), cfg.bands);
        for (std::size_t p = 0; p < programs.size(); ++p) {
            const auto pointing = target_position(programs[p].target, site, s);
            if (!pointing) {
                continue;
            }
            table.pointing[p][s] = pointing;
            table.risk[p][s]     = corruption_risk(*pointing, programs[p].f_lo, programs[p].f_hi, forecasts, cfg.exclusion_radius);
        }
    }
    return table;
}

struct Schedule {
    ScheduleMode                             mode = ScheduleMode::Greedy;
    std::vector<std::optional<int>>          assignment; // per slot: program id or idle
    std::vector<std::optional<DirectionLM>>  pointing;   // per slot
    std::vector<double>                      risk;       // per slot, 0 when idle
    std::vector<std::optional<std::size_t>>  starts;     // per program, input order
    std::vector<int>                         unscheduled;
    double                                   total_risk = 0.0;
    double                                   objective  = 0.0;
    std::vector<std::string>                 diagnostics;

    [[nodiscard]] std::size_t horizon() const noexcept { return assignment.size(); }
};

namespace detail {

inline bool window_feasible(const RiskTable& table, std::size_t p, std::size_t start, std::size_t duration, double risk_cap) {
    if (start + duration > table.horizon) {
        return false;
    }
    for (std::size_t s = start; s < start + duration; ++s) {
        if (!table.visible(p, s) || table.risk[p][s] > risk_cap) {
            return false;
        }
    }
    return true;
}

inline double window_risk(const RiskTable& table, std::size_t p, std::size_t start, std::size_t duration) {
    double sum = 0.0;
    for (std::size_t s = start; s < start + duration; ++s) {
        sum += table.risk[p][s];
    }
    return sum;
}

} // namespace detail

/**
 * Objective of an assignment: sum of window risks (programs in input order,
 * slots ascending) minus lambda times the summed priority of the scheduled
 * programs. Both solvers score leaves with this one function so that equal
 * assignments compare equal bit-for-bit.
 */
[[nodiscard]] inline double schedule_objective(const RiskTable& table, std::span<const Program> programs, std::span<const std::optional<std::size_t>> starts, double lambda) {
    double total  = 0.0;
    double reward = 0.0;
    for (std::size_t p = 0; p < programs.size(); ++p) {
        if (starts[p]) {
            total += detail::window_risk(table, p, *starts[p], programs[p].duration);
            reward += programs[p].priority;
        }
    }
    return total - lambda * reward;
}

/// Lexicographic tie-break key: starts in input order, unscheduled sorting last.
[[nodiscard]] inline std::vector<std::size_t> tie_break_key(std::span<const std::optional<std::size_t>> starts, std::size_t horizon) {
    std::vector<std::size_t> key;
    key.reserve(starts.size());
    for (const auto& s : starts) {
        key.push_back(s.value_or(horizon));
    }
    return key;
}

/// Programs by descending priority (input order on ties); each takes the
/// free feasible window of least total risk, earliest on ties, if doing so
/// does not raise the objective.
[[nodiscard]] inline std::vector<std::optional<std::size_t>> solve_greedy(const RiskTable& table, std::span<const Program> programs, const SchedulerConfig& cfg) {
    std::vector<std::size_t> order(programs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return programs[a].priority > programs[b].priority; });

    std::vector<bool>                       busy(table.horizon, false);
    std::vector<std::optional<std::size_t>> starts(programs.size());
    for (std::size_t p : order) {
        const std::size_t          d = programs[p].duration;
        std::optional<std::size_t> best;
        double                     best_risk = 0.0;
        for (std::size_t s = 0; s + d <= table.horizon; ++s) {
            if (std::any_of(busy.begin() + static_cast<std::ptrdiff_t>(s), busy.begin() + static_cast<std::ptrdiff_t>(s + d), [](bool b) { return b; })) {
                continue;
            }
            if (!detail::window_feasible(table, p, s, d, cfg.risk_cap)) {
                continue;
            }
            const double r = detail::window_risk(table, p, s, d);
            if (!best || r < best_risk) {
                best      = s;
                best_risk = r;
            }
        }
        if (best && best_risk - cfg.lambda * programs[p].priority <= 0.0) {
            starts[p] = best;
            std::fill(busy.begin() + static_cast<std::ptrdiff_t>(*best), busy.begin() + static_cast<std::ptrdiff_t>(*best + d), true);
        }
    }
    return starts;
}

/// Exhaustive depth-first enumeration of every non-overlapping assignment of
/// feasible windows; minimum objective, ties to the smallest tie_break_key.
[[nodiscard]] inline std::vector<std::optional<std::size_t>> solve_exact(const RiskTable& table, std::span<const Program> programs, const SchedulerConfig& cfg) {
    if (table.horizon > exact_max_slots || programs.size() > exact_max_programs) {
        throw std::invalid_argument(fmt::format("exact mode is limited to {} slots and {} programs", exact_max_slots, exact_max_programs));
    }
    std::vector<std::vector<std::size_t>> windows(programs.size());
    for (std::size_t p = 0; p < programs.size(); ++p) {
        for (std::size_t s = 0; s + programs[p].duration <= table.horizon; ++s) {
            if (detail::window_feasible(table, p, s, programs[p].duration, cfg.risk_cap)) {
                windows[p].push_back(s);
            }
        }
    }

    std::vector<std::optional<std::size_t>> current(programs.size());
    std::vector<std::optional<std::size_t>> best(programs.size());
    double                                  best_objective = std::numeric_limits<double>::infinity();
    std::vector<std::size_t>                best_key;
    std::uint32_t                           occupied = 0; // bit s set when slot s is taken

    auto consider = [&] {
        const double obj = schedule_objective(table, programs, current, cfg.lambda);
        auto         key = tie_break_key(current, table.horizon);
        if (obj < best_objective || (obj == best_objective && key < best_key)) {
            best_objective = obj;
            best_key       = std::move(key);
            best           = current;
        }
    };
    auto recurse = [&](auto&& self, std::size_t p) -> void {
        if (p == programs.size()) {
            consider();
            return;
        }
        const std::size_t d = programs[p].duration;
        for (std::size_t s : windows[p]) {
            const std::uint32_t mask = ((1u << d) - 1u) << s;
            if (occupied & mask) {
                continue;
            }
            occupied |= mask;
            current[p] = s;
            self(self, p + 1);
            occupied &= ~mask;
        }
        current[p].reset();
        self(self, p + 1);
    };
    recurse(recurse, 0);
    return best;
}

[[nodiscard]] inline Schedule make_schedule(const RiskTable& table, std::span<const Program> programs, std::vector<std::optional<std::size_t>> starts, ScheduleMode mode, const SchedulerConfig& cfg) {
    Schedule out;
    out.mode = mode;
    out.assignment.assign(table.horizon, std::nullopt);
    out.pointing.assign(table.horizon, std::nullopt);
    out.risk.assign(table.horizon, 0.0);
    for (std::size_t p = 0; p < programs.size(); ++p) {
        if (!starts[p]) {
            out.unscheduled.push_back(programs[p].id);
            continue;
        }
        for (std::size_t s = *starts[p]; s < *starts[p] + programs[p].duration; ++s) {
            out.assignment[s] = programs[p].id;
            out.pointing[s]   = table.pointing[p][s];
            out.risk[s]       = table.risk[p][s];
        }
    }
    out.objective = schedule_objective(table, programs, starts, cfg.lambda);
    for (std::size_t p = 0; p < programs.size(); ++p) {
        if (starts[p]) {
            out.total_risk += detail::window_risk(table, p, *starts[p], programs[p].duration);
        }
    }
    out.starts = std::move(starts);
    return out;
}

/// Plan `horizon` slots for `programs` against the predicted RFI environment.
[[nodiscard]] inline Schedule schedule(std::span<const Program> programs, const SiteModel& site, std::size_t horizon, std::span<const RfiTrack> tracks, ScheduleMode mode, const SchedulerConfig& cfg) {
    std::set<int> ids;
    for (const auto& p : programs) {
        p.validate();
        if (!ids.insert(p.id).second) {
            throw std::invalid_argument(fmt::format("duplicate program id {}", p.id));
        }
    }
    if (mode == ScheduleMode::Exact && (horizon > exact_max_slots || programs.size() > exact_max_programs)) {
        throw std::invalid_argument(fmt::format("exact mode is limited to {} slots and {} programs", exact_max_slots, exact_max_programs));
    }
    const RiskTable table  = build_risk_table(programs, site, horizon, tracks, cfg);
    auto            starts = mode == ScheduleMode::Exact ? solve_exact(table, programs, cfg) : solve_greedy(table, programs, cfg);
    Schedule        out    = make_schedule(table, programs, std::move(starts), mode, cfg);

    const bool none_fit = std::all_of(programs.begin(), programs.end(), [&](const Program& p) { return p.duration > horizon; });
    if (!programs.empty() && none_fit) {
        out.diagnostics.push_back(fmt::format("horizon of {} slots is shorter than every program duration; nothing scheduled", horizon));
        return out;
    }
    for (std::size_t p = 0; p < programs.size(); ++p) {
        if (out.starts[p]) {
            continue;
        }
        if (programs[p].duration > horizon) {
            out.diagnostics.push_back(fmt::format("program {} needs {} slots, horizon is {}", programs[p].id, programs[p].duration, horizon));
        } else {
            out.diagnostics.push_back(fmt::format("program {} left unscheduled: no free visible window under risk cap {} lowers the objective", programs[p].id, cfg.risk_cap));
        }
    }
    return out;
}

struct ChannelConfig {
    double      start_hz = 0.0;
    double      width_hz = 1.0;
    std::size_t count    = 1;

    void validate() const {
        if (!(width_hz > 0.0) || count < 1) {
            throw std::invalid_argument("channelisation needs width > 0 and at least one channel");
        }
    }
};

/// Boolean (slot, channel) grid of cells to discard.
struct FlagMask {
    std::size_t          n_slots       = 0;
    std::size_t          n_channels    = 0;
    double               slot_length   = 0.0;
    double               channel_start = 0.0;
    double               channel_width = 0.0;
    std::vector<uint8_t> cells; // row-major by slot

    [[nodiscard]] bool at(std::size_t slot, std::size_t channel) const { return cells.at(slot * n_channels + channel) != 0; }
    void               set(std::size_t slot, std::size_t channel) { cells.at(slot * n_channels + channel) = 1; }
    [[nodiscard]] std::size_t count() const noexcept { return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), uint8_t{1})); }
};

/**
 * Preventative flags for fast movers: for every scheduled slot and Fast
 * track, flag the channels overlapping the track's band when the predicted
 * separation from the pointing, less the prediction uncertainty, is inside
 * the exclusion radius.
 */
[[nodiscard]] inline FlagMask flag_mask(std::span<const RfiTrack> tracks, const Schedule& sched, const SiteModel& site, double exclusion_radius, const ChannelConfig& channels, std::span<const BandRule> bands = {}) {
    channels.validate();
    FlagMask mask{sched.horizon(), channels.count, site.slot_length, channels.start_hz, channels.width_hz, std::vector<uint8_t>(sched.horizon() * channels.count, 0)};
    for (const auto& track : tracks) {
        if (track.motion != MotionClass::Fast) {
            continue;
        }
        const auto [band_lo, band_hi] = track_band(track, bands);
        for (std::size_t s = 0; s < sched.horizon(); ++s) {
            if (!sched.assignment[s] || !sched.pointing[s]) {
                continue;
            }
            const Prediction p = predict(track, site.slot_time(s));
            if (p.below_horizon || !(lm_distance(p.direction, *sched.pointing[s]) - p.radius < exclusion_radius)) {
                continue;
            }
            for (std::size_t c = 0; c < channels.count; ++c) {
                const double lo = channels.start_hz + static_cast<double>(c) * channels.width_hz;
                if (bands_overlap(lo, lo + channels.width_hz, band_lo, band_hi)) {
                    mask.set(s, c);
                }
            }
        }
    }
    return mask;
}

} // namespace cyclomon

#endif // CYCLOMON_SCHED_HPP
