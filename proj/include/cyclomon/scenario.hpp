#ifndef CYCLOMON_SCENARIO_HPP
#define CYCLOMON_SCENARIO_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include <cyclomon/arraysim.hpp>
#include <cyclomon/imaging.hpp>
#include <cyclomon/io.hpp>
#include <cyclomon/sched.hpp>
#include <cyclomon/siggen.hpp>
#include <cyclomon/tracker.hpp>

namespace cyclomon {

inline constexpr const char* scenario_schema = "cyclomon.scenario/1";

/// Invalid scenario; `key()` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(fmt::format("{}: {}", key, what))
        , _key(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return _key; }

private:
    std::string _key;
};

struct ArrayLayout {
    std::size_t                  antennas             = 48;
    double                       aperture_wavelengths = 6.0;
    double                       reference_freq       = 1.4e9;
    std::vector<AntennaPosition> positions; // explicit layout; overrides the random one
};

struct CyclicSettings {
    double      alpha_min    = 0.0; // Hz; 0 = one FFT bin
    double      alpha_max    = 0.0; // Hz; 0 = Nyquist less one bin
    double      alpha_step   = 0.0; // Hz; 0 = one FFT bin
    std::size_t lag          = 0;
    bool        conjugate    = true; // also scan the conjugate spectrum (lag 0)
    std::size_t max_features = 4;
};

struct ImagingSettings {
    SkymapGrid  grid{};
    std::size_t max_peaks = 4;
};

struct ScheduleSettings {
    ScheduleMode                 mode    = ScheduleMode::Greedy;
    std::size_t                  horizon = 12;
    SiteModel                    site{};
    bool                         start_time_set = false;
    std::vector<Program>         programs;
    SchedulerConfig              scheduler{};
    std::optional<ChannelConfig> channels;
};

struct ScenarioConfig {
    std::uint64_t                   seed = 0;
    ArrayLayout                     array{};
    std::vector<SourceSpec>         sources;
    std::size_t                     n_samples          = 2048;
    double                          sample_rate        = 1.0e6;
    double                          system_noise_power = 1.0;
    std::size_t                     frame_count        = 1;
    double                          frame_interval     = 0.0; // s; 0 = back-to-back frames
    CyclicSettings                  cyclic{};
    ImagingSettings                 imaging{};
    TrackerConfig                   tracker{};
    bool                            alpha_tol_set = false;
    std::optional<ScheduleSettings> schedule;
    bool                            write_snapshots = false;
    nlohmann::json                  document; // resolved input, seed override applied

    [[nodiscard]] double frame_duration() const noexcept { return static_cast<double>(n_samples) / sample_rate; }
    [[nodiscard]] double interval() const noexcept { return frame_interval > 0.0 ? frame_interval : frame_duration(); }
    [[nodiscard]] double bin_width() const noexcept { return sample_rate / static_cast<double>(n_samples); }
    [[nodiscard]] double alpha_step() const noexcept { return cyclic.alpha_step > 0.0 ? cyclic.alpha_step : bin_width(); }
    [[nodiscard]] double alpha_min() const noexcept { return cyclic.alpha_min > 0.0 ? cyclic.alpha_min : bin_width(); }
    [[nodiscard]] double alpha_max() const noexcept { return cyclic.alpha_max > 0.0 ? cyclic.alpha_max : 0.5 * sample_rate - bin_width(); }
    [[nodiscard]] std::vector<double> alphas() const { return alpha_grid(alpha_min(), alpha_max(), alpha_step()); }
};

/// Stream index for the random array layout.
inline constexpr std::uint64_t geometry_stream = 0x67656f6dULL;

[[nodiscard]] inline ArrayGeometry scenario_geometry(const ScenarioConfig& cfg) {
    if (!cfg.array.positions.empty()) {
        return ArrayGeometry{cfg.array.positions, cfg.array.reference_freq};
    }
    return random_geometry(cfg.array.antennas, cfg.array.aperture_wavelengths, cfg.array.reference_freq, derive_seed(cfg.seed, geometry_stream));
}

namespace detail {

using nlohmann::json;

/// Strict view of a JSON object: every read records its key, and finish()
/// rejects anything left unread.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path)
        : _j(j)
        , _path(std::move(path)) {
        if (!_j.is_object()) {
            throw ConfigError(_path.empty() ? "<root>" : _path, "expected an object");
        }
    }

    [[nodiscard]] std::string key(const std::string& name) const { return _path.empty() ? name : _path + "." + name; }
    [[nodiscard]] bool        has(const std::string& name) const { return _j.contains(name); }

    const json& raw(const std::string& name) {
        _seen.insert(name);
        if (!_j.contains(name)) {
            throw ConfigError(key(name), "required key is missing");
        }
        return _j.at(name);
    }

    template<typename T>
    T get(const std::string& name) {
        const json& v = raw(name);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) {
                    throw ConfigError(key(name), "expected true or false");
                }
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
                    throw ConfigError(key(name), "expected a non-negative integer");
                }
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) {
                    throw ConfigError(key(name), "expected a number");
                }
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) {
                    throw ConfigError(key(name), "expected a string");
                }
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(key(name), e.what());
        }
    }

    template<typename T>
    T get_or(const std::string& name, T fallback) {
        return has(name) ? get<T>(name) : fallback;
    }

    double positive(const std::string& name, double fallback) {
        const double v = get_or<double>(name, fallback);
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError(key(name), "must be a positive finite number");
        }
        return v;
    }

    double non_negative(const std::string& name, double fallback) {
        const double v = get_or<double>(name, fallback);
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ConfigError(key(name), "must be a non-negative finite number");
        }
        return v;
    }

    ObjectReader object(const std::string& name) { return ObjectReader(raw(name), key(name)); }

    const json& array(const std::string& name) {
        const json& v = raw(name);
        if (!v.is_array()) {
            throw ConfigError(key(name), "expected an array");
        }
        return v;
    }

    void finish() const {
        for (const auto& [name, value] : _j.items()) {
            if (!_seen.contains(name)) {
                throw ConfigError(key(name), "unknown key");
            }
        }
    }

private:
    const json&           _j;
    std::string           _path;
    std::set<std::string> _seen;
};

template<typename Fn>
void rethrow_as(const std::string& key, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(key, e.what());
    }
}

inline double radians(double deg) noexcept { return deg * std::numbers::pi / 180.0; }

inline TrajectorySpec parse_trajectory(ObjectReader r) {
    const auto     kind = r.get<std::string>("kind");
    TrajectorySpec t;
    t.start = {r.get<double>("l"), r.get<double>("m")};
    if (kind == "fixed") {
        t.kind = TrajectoryKind::Fixed;
    } else if (kind == "linear") {
        t.kind   = TrajectoryKind::LinearLM;
        t.rate_l = r.get_or<double>("rate_l", 0.0);
        t.rate_m = r.get_or<double>("rate_m", 0.0);
    } else {
        throw ConfigError(r.key("kind"), fmt::format("unknown trajectory kind '{}' (fixed, linear)", kind));
    }
    if (!t.start.visible()) {
        throw ConfigError(r.key("l"), "start direction must satisfy l^2 + m^2 <= 1");
    }
    r.finish();
    return t;
}

inline SourceSpec parse_source(ObjectReader r, double sample_rate) {
    SourceSpec s;
    const auto kind = r.get<std::string>("kind");
    if (kind == "astro_noise") {
        s.kind = SourceKind::AstroNoise;
    } else if (kind == "bpsk") {
        s.kind           = SourceKind::Bpsk;
        s.baud_rate      = r.positive("baud_rate_hz", 0.0);
        s.carrier_offset = r.get_or<double>("carrier_offset_hz", 0.0);
    } else if (kind == "cw") {
        s.kind           = SourceKind::CwTone;
        s.carrier_offset = r.get_or<double>("carrier_offset_hz", 0.0);
        s.phase          = r.get_or<double>("phase_rad", 0.0);
    } else {
        throw ConfigError(r.key("kind"), fmt::format("unknown source kind '{}' (astro_noise, bpsk, cw)", kind));
    }
    s.snr_db     = r.get<double>("snr_db");
    s.seed       = r.get<std::uint64_t>("seed");
    s.trajectory = parse_trajectory(r.object("trajectory"));
    rethrow_as(r.key("kind"), [&] { s.validate(sample_rate); });
    r.finish();
    return s;
}

inline SkymapGrid parse_grid(ObjectReader r) {
    SkymapGrid g;
    g.n_l   = r.get_or<std::size_t>("n_l", g.n_l);
    g.n_m   = r.get_or<std::size_t>("n_m", g.n_m);
    g.l_min = r.get_or<double>("l_min", g.l_min);
    g.l_max = r.get_or<double>("l_max", g.l_max);
    g.m_min = r.get_or<double>("m_min", g.m_min);
    g.m_max = r.get_or<double>("m_max", g.m_max);
    rethrow_as(r.key("n_l"), [&] { g.validate(); });
    r.finish();
    return g;
}

inline Program parse_program(ObjectReader r) {
    Program p;
    p.id         = r.get<int>("id");
    p.target     = {radians(r.get<double>("ra_deg")), radians(r.get<double>("dec_deg"))};
    p.f_lo       = r.get<double>("f_lo_hz");
    p.f_hi       = r.get<double>("f_hi_hz");
    p.duration   = r.get<std::size_t>("duration");
    p.priority   = r.positive("priority", 1.0);
    rethrow_as(r.key("duration"), [&] { p.validate(); });
    r.finish();
    return p;
}

inline BandRule parse_band(ObjectReader r) {
    BandRule b;
    b.alpha     = r.get<double>("alpha_hz");
    b.conjugate = r.get_or<bool>("conjugate", false);
    b.tolerance = r.non_negative("tolerance_hz", 0.0);
    b.f_lo      = r.get<double>("f_lo_hz");
    b.f_hi      = r.get<double>("f_hi_hz");
    if (!(b.f_lo < b.f_hi)) {
        throw ConfigError(r.key("f_hi_hz"), "must exceed f_lo_hz");
    }
    r.finish();
    return b;
}

inline ScheduleSettings parse_schedule(ObjectReader r) {
    ScheduleSettings s;
    const auto       mode = r.get_or<std::string>("mode", "greedy");
    if (mode == "greedy") {
        s.mode = ScheduleMode::Greedy;
    } else if (mode == "exact") {
        s.mode = ScheduleMode::Exact;
    } else {
        throw ConfigError(r.key("mode"), "must be greedy or exact");
    }
    s.horizon = r.get<std::size_t>("horizon");
    if (s.horizon < 1) {
        throw ConfigError(r.key("horizon"), "must be at least 1 slot");
    }
    {
        auto site              = r.object("site");
        s.site.latitude        = radians(site.get<double>("latitude_deg"));
        s.site.slot_length     = site.positive("slot_length_s", 60.0);
        s.site.lst0            = radians(site.get_or<double>("lst0_deg", 0.0));
        s.start_time_set       = site.has("start_time_s");
        s.site.start_time      = site.get_or<double>("start_time_s", 0.0);
        rethrow_as(site.key("latitude_deg"), [&] { s.site.validate(); });
        site.finish();
    }
    const auto&   programs = r.array("programs");
    std::set<int> ids;
    for (std::size_t k = 0; k < programs.size(); ++k) {
        s.programs.push_back(parse_program(ObjectReader(programs[k], r.key(fmt::format("programs[{}]", k)))));
        if (!ids.insert(s.programs.back().id).second) {
            throw ConfigError(r.key(fmt::format("programs[{}].id", k)), "duplicate program id");
        }
    }
    if (r.has("bands")) {
        const auto& bands = r.array("bands");
        for (std::size_t k = 0; k < bands.size(); ++k) {
            s.scheduler.bands.push_back(parse_band(ObjectReader(bands[k], r.key(fmt::format("bands[{}]", k)))));
        }
    }
    s.scheduler.lambda           = r.non_negative("lambda", s.scheduler.lambda);
    s.scheduler.risk_cap         = r.non_negative("risk_cap", s.scheduler.risk_cap);
    s.scheduler.exclusion_radius = r.positive("exclusion_radius", s.scheduler.exclusion_radius);
    if (s.mode == ScheduleMode::Exact && (s.horizon > exact_max_slots || s.programs.size() > exact_max_programs)) {
        throw ConfigError(r.key("mode"), fmt::format("exact mode is limited to {} slots and {} programs", exact_max_slots, exact_max_programs));
    }
    if (r.has("channels")) {
        auto          c = r.object("channels");
        ChannelConfig ch;
        ch.start_hz = c.get<double>("start_hz");
        ch.width_hz = c.positive("width_hz", 1.0);
        ch.count    = c.get<std::size_t>("count");
        if (ch.count < 1) {
            throw ConfigError(c.key("count"), "must be at least 1");
        }
        c.finish();
        s.channels = ch;
    }
    r.finish();
    return s;
}

} // namespace detail

/**
 * Parses and validates a scenario document. Unknown keys, wrong types and
 * values that break a module invariant raise ConfigError naming the key.
 */
[[nodiscard]] inline ScenarioConfig parse_scenario(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override = std::nullopt) {
    detail::ObjectReader root(doc, "");
    ScenarioConfig       cfg;
    if (root.get<std::string>("schema") != scenario_schema) {
        throw ConfigError("schema", fmt::format("expected \"{}\"", scenario_schema));
    }
    cfg.seed = seed_override ? *seed_override : root.get<std::uint64_t>("seed");
    if (seed_override && root.has("seed")) {
        (void)root.raw("seed");
    }

    {
        auto scene             = root.object("scene");
        cfg.sample_rate        = scene.positive("sample_rate_hz", cfg.sample_rate);
        cfg.n_samples          = scene.get_or<std::size_t>("n_samples", cfg.n_samples);
        cfg.system_noise_power = scene.positive("system_noise_power", cfg.system_noise_power);
        if (cfg.n_samples < 1) {
            throw ConfigError(scene.key("n_samples"), "must be at least 1");
        }
        auto array                     = scene.object("array");
        cfg.array.reference_freq       = array.positive("reference_freq_hz", cfg.array.reference_freq);
        cfg.array.aperture_wavelengths = array.positive("aperture_wavelengths", cfg.array.aperture_wavelengths);
        if (array.has("positions_m")) {
            for (const auto& p : array.array("positions_m")) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                    throw ConfigError(array.key("positions_m"), "expected [x, y] pairs in metres");
                }
                cfg.array.positions.push_back({p[0].get<double>(), p[1].get<double>()});
            }
            cfg.array.antennas = cfg.array.positions.size();
            if (array.has("antennas") && array.get<std::size_t>("antennas") != cfg.array.antennas) {
                throw ConfigError(array.key("antennas"), "disagrees with the number of positions");
            }
        } else {
            cfg.array.antennas = array.get_or<std::size_t>("antennas", cfg.array.antennas);
        }
        if (cfg.array.antennas < 1) {
            throw ConfigError(array.key("antennas"), "must be at least 1");
        }
        array.finish();

        const auto& sources = scene.array("sources");
        for (std::size_t k = 0; k < sources.size(); ++k) {
            cfg.sources.push_back(detail::parse_source(detail::ObjectReader(sources[k], scene.key(fmt::format("sources[{}]", k))), cfg.sample_rate));
        }
        scene.finish();
    }

    if (root.has("frames")) {
        auto frames        = root.object("frames");
        cfg.frame_count    = frames.get_or<std::size_t>("count", cfg.frame_count);
        cfg.frame_interval = frames.non_negative("interval_s", 0.0);
        if (cfg.frame_count < 1) {
            throw ConfigError(frames.key("count"), "must be at least 1");
        }
        if (cfg.frame_interval > 0.0 && cfg.frame_interval < cfg.frame_duration()) {
            throw ConfigError(frames.key("interval_s"), "frames may not overlap; interval must be at least n_samples / sample_rate");
        }
        frames.finish();
    }

    if (root.has("cyclic")) {
        auto c                  = root.object("cyclic");
        cfg.cyclic.alpha_min    = c.non_negative("alpha_min_hz", 0.0);
        cfg.cyclic.alpha_max    = c.non_negative("alpha_max_hz", 0.0);
        cfg.cyclic.alpha_step   = c.non_negative("alpha_step_hz", 0.0);
        cfg.cyclic.lag          = c.get_or<std::size_t>("lag", cfg.cyclic.lag);
        cfg.cyclic.conjugate    = c.get_or<bool>("conjugate", cfg.cyclic.conjugate);
        cfg.cyclic.max_features = c.get_or<std::size_t>("max_features", cfg.cyclic.max_features);
        if (cfg.cyclic.lag >= cfg.n_samples) {
            throw ConfigError(c.key("lag"), "must be smaller than scene.n_samples");
        }
        c.finish();
    }
    if (!(cfg.alpha_min() < cfg.alpha_max()) || cfg.alpha_max() >= cfg.sample_rate) {
        throw ConfigError("cyclic.alpha_max_hz", "alpha grid must be increasing and below the sample rate");
    }
    if (cfg.alphas().size() < min_detection_grid) {
        throw ConfigError("cyclic.alpha_step_hz", fmt::format("alpha grid needs at least {} points", min_detection_grid));
    }

    if (root.has("imaging")) {
        auto im = root.object("imaging");
        if (im.has("grid")) {
            cfg.imaging.grid = detail::parse_grid(im.object("grid"));
        }
        cfg.imaging.max_peaks = im.get_or<std::size_t>("max_peaks", cfg.imaging.max_peaks);
        if (cfg.imaging.max_peaks < 1) {
            throw ConfigError(im.key("max_peaks"), "must be at least 1");
        }
        im.finish();
    }

    if (root.has("tracker")) {
        auto t                      = root.object("tracker");
        cfg.tracker.stationary_speed = t.non_negative("stationary_speed", cfg.tracker.stationary_speed);
        cfg.tracker.fast_speed       = t.non_negative("fast_speed", cfg.tracker.fast_speed);
        cfg.tracker.gate_factor      = t.non_negative("gate_factor", cfg.tracker.gate_factor);
        cfg.tracker.gate_min         = t.positive("gate_min", cfg.tracker.gate_min);
        cfg.alpha_tol_set            = t.has("alpha_tol_hz");
        cfg.tracker.alpha_tol        = t.non_negative("alpha_tol_hz", 0.0);
        cfg.tracker.drop_after       = t.get_or<std::size_t>("drop_after", cfg.tracker.drop_after);
        cfg.tracker.min_points       = t.get_or<std::size_t>("min_points", cfg.tracker.min_points);
        detail::rethrow_as(t.key("fast_speed"), [&] { cfg.tracker.validate(); });
        t.finish();
    }
    if (!cfg.alpha_tol_set) {
        cfg.tracker.alpha_tol = cfg.alpha_step();
    }

    if (root.has("schedule")) {
        cfg.schedule = detail::parse_schedule(root.object("schedule"));
    }
    if (root.has("output")) {
        auto out            = root.object("output");
        cfg.write_snapshots = out.get_or<bool>("write_snapshots", false);
        out.finish();
    }
    root.finish();

    detail::rethrow_as("scene.array", [&] {
        Scene scene{scenario_geometry(cfg), cfg.sources, cfg.n_samples, cfg.sample_rate, cfg.system_noise_power, cfg.seed, 0.0};
        scene.validate();
    });

    cfg.document = doc;
    if (seed_override) {
        cfg.document["seed"] = *seed_override;
    }
    return cfg;
}

[[nodiscard]] inline ScenarioConfig load_scenario(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt) {
    std::string text;
    try {
        text = io::detail::slurp(path);
    } catch (const std::exception& e) {
        throw ConfigError("<file>", e.what());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<file>", fmt::format("{} is not valid JSON: {}", path.string(), e.what()));
    }
    return parse_scenario(doc, seed_override);
}

} // namespace cyclomon

#endif // CYCLOMON_SCENARIO_HPP
