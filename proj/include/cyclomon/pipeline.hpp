#ifndef CYCLOMON_PIPELINE_HPP
#define CYCLOMON_PIPELINE_HPP

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include <cyclomon/arraysim.hpp>
#include <cyclomon/cyclospec.hpp>
#include <cyclomon/imaging.hpp>
#include <cyclomon/io.hpp>
#include <cyclomon/scenario.hpp>
#include <cyclomon/sched.hpp>
#include <cyclomon/tracker.hpp>

#ifndef CYCLOMON_VERSION
#define CYCLOMON_VERSION "0.0.0"
#endif

namespace cyclomon {

[[nodiscard]] inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Hash of the resolved scenario in canonical (sorted-key, compact) form.
[[nodiscard]] inline std::string config_hash(const ScenarioConfig& cfg) { return fmt::format("fnv1a64:{:016x}", fnv1a64(cfg.document.dump())); }

/// Everything one frame produced.
struct FrameResult {
    std::size_t                   index = 0;
    double                        time  = 0.0; // s, frame centre
    CyclicSpectrum                spectrum;
    std::optional<CyclicSpectrum> conjugate_spectrum;
    std::vector<CyclicFeature>    features; // imaged, strongest first
    Skymap                        classical;
    std::vector<Skymap>           cyclic_maps; // one per feature
    std::vector<Detection>        detections;
};

struct PipelineResult {
    ArrayGeometry            geometry;
    std::vector<FrameResult> frames;
    TrackSet                 tracks;
    std::optional<Schedule>  schedule;
    std::optional<FlagMask>  flags;
};

[[nodiscard]] inline Scene frame_scene(const ScenarioConfig& cfg, const ArrayGeometry& geom, std::size_t frame) {
    return Scene{geom, cfg.sources, cfg.n_samples, cfg.sample_rate, cfg.system_noise_power, derive_seed(cfg.seed, frame), static_cast<double>(frame) * cfg.interval()};
}

/**
 * One monitoring cycle: scan the ordinary (configured lag) and conjugate
 * (lag 0) cyclic spectra, keep the strongest `max_features` detections, image
 * each one and turn its sky peaks into detections at the frame centre time.
 */
[[nodiscard]] inline FrameResult process_frame(const ScenarioConfig& cfg, const ArrayGeometry& geom, const ArraySnapshot& snap, std::size_t index) {
    FrameResult out;
    out.index = index;
    out.time  = snap.t0 + 0.5 * static_cast<double>(snap.samples()) / snap.sample_rate;

    const auto alphas = cfg.alphas();
    out.spectrum      = cyclic_spectrum(snap, alphas, false, cfg.cyclic.lag);
    auto features     = detect_cyclic_freqs(out.spectrum);
    if (cfg.cyclic.conjugate) {
        out.conjugate_spectrum = cyclic_spectrum(snap, alphas, true, 0);
        auto conj              = detect_cyclic_freqs(*out.conjugate_spectrum);
        features.insert(features.end(), conj.begin(), conj.end());
        std::stable_sort(features.begin(), features.end(), [](const CyclicFeature& a, const CyclicFeature& b) { return a.magnitude > b.magnitude; });
    }
    if (features.size() > cfg.cyclic.max_features) {
        features.resize(cfg.cyclic.max_features);
    }
    out.features = features;

    out.classical = skymap(corr_matrix(snap), geom, cfg.imaging.grid);
    for (const auto& f : features) {
        Skymap map = cyclic_skymap(cyclic_corr_matrix(snap, f.alpha, f.conjugate, f.lag), geom, cfg.imaging.grid);
        for (const auto& peak : locate_peaks(map, cfg.imaging.max_peaks)) {
            out.detections.push_back({out.time, f.alpha, f.conjugate, peak.direction, peak.power, f.lag});
        }
        out.cyclic_maps.push_back(std::move(map));
    }
    return out;
}

namespace detail {

inline std::string frame_name(std::size_t frame) { return fmt::format("frame_{:04d}", frame); }

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm           tm{};
    gmtime_r(&now, &tm);
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
}

} // namespace detail

[[nodiscard]] inline SiteModel planning_site(const ScenarioConfig& cfg) {
    SiteModel site = cfg.schedule->site;
    if (!cfg.schedule->start_time_set) {
        site.start_time = static_cast<double>(cfg.frame_count) * cfg.interval();
    }
    return site;
}

/// Plans from a track set using the scenario's schedule section.
inline void plan(const ScenarioConfig& cfg, PipelineResult& result, std::optional<ScheduleMode> mode_override = std::nullopt) {
    if (!cfg.schedule) {
        return;
    }
    const auto&     s    = *cfg.schedule;
    const SiteModel site = planning_site(cfg);
    result.schedule      = schedule(s.programs, site, s.horizon, result.tracks.tracks, mode_override.value_or(s.mode), s.scheduler);
    if (s.channels) {
        result.flags = flag_mask(result.tracks.tracks, *result.schedule, site, s.scheduler.exclusion_radius, *s.channels, s.scheduler.bands);
    }
}

/// Runs every frame and the planner without touching the filesystem.
[[nodiscard]] inline PipelineResult run_pipeline(const ScenarioConfig& cfg, std::optional<ScheduleMode> mode_override = std::nullopt) {
    PipelineResult result;
    result.geometry = scenario_geometry(cfg);
    for (std::size_t f = 0; f < cfg.frame_count; ++f) {
        const ArraySnapshot snap = synthesize(frame_scene(cfg, result.geometry, f));
        FrameResult         fr   = process_frame(cfg, result.geometry, snap, f);
        result.tracks            = associate(std::move(result.tracks), fr.detections, cfg.tracker);
        result.frames.push_back(std::move(fr));
    }
    plan(cfg, result, mode_override);
    return result;
}

/**
 * Runs the whole chain and writes the artifacts under `out`:
 *   manifest.json, array.csv,
 *   spectra/frame_NNNN_{cyclic,conjugate}.csv,
 *   skymaps/frame_NNNN_{classical,feature_KK}.{csv,pgm,txt},
 *   tracks/frame_NNNN.json, schedule.json, flags.csv,
 *   snapshots/frame_NNNN.csv when enabled.
 * All files except the manifest timestamp depend only on the scenario.
 */
inline PipelineResult run_to_directory(const ScenarioConfig& cfg, const std::filesystem::path& out, std::optional<ScheduleMode> mode_override = std::nullopt) {
    namespace fs = std::filesystem;
    fs::create_directories(out);
    std::vector<std::string> written;
    const auto               rel = [&](const fs::path& p) { written.push_back(fs::relative(p, out).generic_string()); return p; };

    PipelineResult result;
    result.geometry = scenario_geometry(cfg);
    io::write_array(rel(out / "array.csv"), result.geometry);

    for (std::size_t f = 0; f < cfg.frame_count; ++f) {
        const std::string   name = detail::frame_name(f);
        const ArraySnapshot snap = synthesize(frame_scene(cfg, result.geometry, f));
        if (cfg.write_snapshots) {
            io::write_snapshot(rel(out / "snapshots" / (name + ".csv")), snap);
        }
        FrameResult fr = process_frame(cfg, result.geometry, snap, f);
        io::write_spectrum(rel(out / "spectra" / (name + "_cyclic.csv")), fr.spectrum);
        if (fr.conjugate_spectrum) {
            io::write_spectrum(rel(out / "spectra" / (name + "_conjugate.csv")), *fr.conjugate_spectrum);
        }
        const auto classical_stem = out / "skymaps" / (name + "_classical");
        io::write_skymap(classical_stem, fr.classical);
        for (const char* ext : {".csv", ".pgm", ".txt"}) {
            rel(fs::path(classical_stem).concat(ext));
        }
        for (std::size_t k = 0; k < fr.cyclic_maps.size(); ++k) {
            const auto stem = out / "skymaps" / fmt::format("{}_feature_{:02d}", name, k);
            io::write_skymap(stem, fr.cyclic_maps[k]);
            for (const char* ext : {".csv", ".pgm", ".txt"}) {
                rel(fs::path(stem).concat(ext));
            }
        }
        result.tracks = associate(std::move(result.tracks), fr.detections, cfg.tracker);
        io::write_track_log(rel(out / "tracks" / (name + ".json")), result.tracks, f, fr.time, fr.detections);
        result.frames.push_back(std::move(fr));
    }

    plan(cfg, result, mode_override);
    if (result.schedule) {
        io::write_schedule(rel(out / "schedule.json"), *result.schedule, cfg.schedule->programs, planning_site(cfg));
    }
    if (result.flags) {
        io::write_flag_mask(rel(out / "flags.csv"), *result.flags);
    }

    std::sort(written.begin(), written.end());
    const nlohmann::json manifest = {{"format", "cyclomon.manifest/1"},
                                     {"version", CYCLOMON_VERSION},
                                     {"config_hash", config_hash(cfg)},
                                     {"libraries", {{"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)}, {"fftw", std::string(fftw_version)}, {"fmt", fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100)}, {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR, NLOHMANN_JSON_VERSION_PATCH)}}},
                                     {"seed", cfg.seed},
                                     {"frames", cfg.frame_count},
                                     {"schedule_mode", result.schedule ? to_string(result.schedule->mode) : "none"},
                                     {"created_utc", detail::utc_timestamp()},
                                     {"files", written}};
    io::detail::open_out(out / "manifest.json") << manifest.dump(2) << '\n';
    return result;
}

} // namespace cyclomon

#endif // CYCLOMON_PIPELINE_HPP
