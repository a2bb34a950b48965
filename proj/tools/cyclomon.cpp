// cyclomon: scenario-driven front end for the RFI monitoring chain.
//
// Exit status: 0 success, 2 invalid configuration or arguments, 3 runtime failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cyclomon/pipeline.hpp>

namespace {

constexpr int exit_config  = 2;
constexpr int exit_runtime = 3;

std::optional<cyclomon::ScheduleMode> parse_mode(const std::string& s) {
    if (s.empty()) {
        return std::nullopt;
    }
    return s == "exact" ? cyclomon::ScheduleMode::Exact : cyclomon::ScheduleMode::Greedy;
}

void summarize(const cyclomon::PipelineResult& r) {
    std::size_t detections = 0;
    for (const auto& f : r.frames) {
        detections += f.detections.size();
    }
    fmt::print("frames: {}  detections: {}  tracks: {}\n", r.frames.size(), detections, r.tracks.tracks.size());
    for (const auto& t : r.tracks.tracks) {
        fmt::print("  track {:>3}  alpha {:>12.6g} Hz  {:<4} {:<12} points {:>3}  pos ({:+.4f}, {:+.4f})  rate ({:+.2e}, {:+.2e})/s\n", t.id, t.alpha, t.conjugate ? "conj" : "", to_string(t.motion), t.history.size(),
                   t.history.back().direction.l, t.history.back().direction.m, t.model.rate_l, t.model.rate_m);
    }
    if (r.schedule) {
        fmt::print("schedule ({}): objective {:.6g}  total risk {:.6g}  unscheduled {}\n", to_string(r.schedule->mode), r.schedule->objective, r.schedule->total_risk, r.schedule->unscheduled.size());
        for (const auto& d : r.schedule->diagnostics) {
            fmt::print("  note: {}\n", d);
        }
    }
    if (r.flags) {
        fmt::print("flag mask: {} of {} cells flagged\n", r.flags->count(), r.flags->cells.size());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cyclostationary RFI monitor: synthesis, cyclic imaging, tracking and RFI-aware scheduling"};
    app.set_version_flag("--version", CYCLOMON_VERSION);
    app.require_subcommand(1);

    std::string                  config, out, mode, snapshot, array, tracks;
    std::optional<std::uint64_t> seed;
    bool                         validate_only = false;

    auto* run = app.add_subcommand("run", "Run the full chain from a scenario and write all artifacts");
    run->add_option("--config", config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "Output directory");
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_flag("--validate-only", validate_only, "Validate the scenario and exit without writing outputs");
    run->add_option("--mode", mode, "Override the scheduler mode")->check(CLI::IsMember({"greedy", "exact"}));

    auto* validate = app.add_subcommand("validate", "Validate a scenario file");
    validate->add_option("--config", config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    validate->add_option("--seed", seed, "Override the scenario seed");

    double      alpha     = 0.0;
    bool        conjugate = false;
    std::size_t lag = 0, pixels = 128, max_peaks = 4;
    auto*       sky = app.add_subcommand("skymap", "Image a saved snapshot (classical, or cyclic when --alpha is given)");
    sky->add_option("--snapshot", snapshot, "Snapshot CSV written by `run`")->required()->check(CLI::ExistingFile);
    sky->add_option("--array", array, "Array layout CSV written by `run`")->required()->check(CLI::ExistingFile);
    sky->add_option("--out", out, "Output directory")->required();
    auto* alpha_opt = sky->add_option("--alpha", alpha, "Cyclic frequency in Hz");
    sky->add_flag("--conjugate", conjugate, "Use the conjugate cyclic correlation");
    sky->add_option("--lag", lag, "Lag in samples for the cyclic correlation");
    sky->add_option("--pixels", pixels, "Pixels per axis")->check(CLI::Range(2, 4096));
    sky->add_option("--max-peaks", max_peaks, "Number of peaks to report")->check(CLI::Range(1, 1000));

    auto* sched = app.add_subcommand("schedule", "Plan observations from a saved track log");
    sched->add_option("--config", config, "Scenario JSON file with a schedule section")->required()->check(CLI::ExistingFile);
    sched->add_option("--tracks", tracks, "Track log JSON written by `run`")->required()->check(CLI::ExistingFile);
    sched->add_option("--out", out, "Output directory")->required();
    sched->add_option("--mode", mode, "Override the scheduler mode")->check(CLI::IsMember({"greedy", "exact"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    cyclomon::ScenarioConfig cfg;
    try {
        if (*run || *validate || *sched) {
            cfg = cyclomon::load_scenario(config, seed);
            if (const auto m = parse_mode(mode); m == cyclomon::ScheduleMode::Exact && cfg.schedule &&
                                                  (cfg.schedule->horizon > cyclomon::exact_max_slots || cfg.schedule->programs.size() > cyclomon::exact_max_programs)) {
                throw cyclomon::ConfigError("schedule.mode", fmt::format("exact mode is limited to {} slots and {} programs", cyclomon::exact_max_slots, cyclomon::exact_max_programs));
            }
        }
        if (*run && !validate_only && out.empty()) {
            throw cyclomon::ConfigError("--out", "required unless --validate-only is given");
        }
        if (*sched && !cfg.schedule) {
            throw cyclomon::ConfigError("schedule", "the scenario has no schedule section");
        }
    } catch (const cyclomon::ConfigError& e) {
        fmt::print(stderr, "configuration error: {}\n", e.what());
        return exit_config;
    }

    try {
        if (*validate || (*run && validate_only)) {
            fmt::print("{}: valid ({})\n", config, cyclomon::config_hash(cfg));
            return 0;
        }
        if (*run) {
            const auto result = cyclomon::run_to_directory(cfg, out, parse_mode(mode));
            summarize(result);
            fmt::print("wrote {}\n", out);
            return 0;
        }
        if (*sky) {
            if (!(*alpha_opt) && (conjugate || lag > 0)) {
                fmt::print(stderr, "configuration error: --conjugate and --lag need --alpha\n");
                return exit_config;
            }
            const auto snap = cyclomon::io::read_snapshot(snapshot);
            const auto geom = cyclomon::io::read_array(array);
            cyclomon::SkymapGrid grid;
            grid.n_l = grid.n_m = pixels;
            const cyclomon::Skymap map = *alpha_opt ? cyclomon::cyclic_skymap(cyclomon::cyclic_corr_matrix(snap, alpha, conjugate, lag), geom, grid)
                                                    : cyclomon::skymap(cyclomon::corr_matrix(snap), geom, grid);
            const std::filesystem::path dir(out);
            cyclomon::io::write_skymap(dir / "skymap", map);
            auto peaks = nlohmann::json::array();
            for (const auto& p : cyclomon::locate_peaks(map, max_peaks)) {
                peaks.push_back({{"l", p.direction.l}, {"m", p.direction.m}, {"power", p.power}, {"i", p.i}, {"j", p.j}});
                fmt::print("peak ({:+.4f}, {:+.4f})  power {:.6g}\n", p.direction.l, p.direction.m, p.power);
            }
            cyclomon::io::detail::open_out(dir / "peaks.json") << nlohmann::json{{"kind", to_string(map.kind)}, {"alpha_hz", map.alpha}, {"peaks", peaks}}.dump(2) << '\n';
            return 0;
        }
        if (*sched) {
            cyclomon::PipelineResult result;
            result.tracks = cyclomon::io::read_track_log(tracks);
            cyclomon::plan(cfg, result, parse_mode(mode));
            const std::filesystem::path dir(out);
            cyclomon::io::write_schedule(dir / "schedule.json", *result.schedule, cfg.schedule->programs, cyclomon::planning_site(cfg));
            if (result.flags) {
                cyclomon::io::write_flag_mask(dir / "flags.csv", *result.flags);
            }
            summarize(result);
            return 0;
        }
    } catch (const cyclomon::ConfigError& e) {
        fmt::print(stderr, "configuration error: {}\n", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return exit_runtime;
    }
    return 0;
}
