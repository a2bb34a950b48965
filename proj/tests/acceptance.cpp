// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// all pass. Usage: acceptance <fig4.scenario> <scratch directory>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/SVD>
#include <fmt/format.h>

#include <cyclomon/pipeline.hpp>

#include "sched_oracle.hpp"
#include "support.hpp"

using namespace cyclomon;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr std::size_t fig4_seeds        = 20;
constexpr double      fig4_hit_rate     = 0.95; // fraction of seeds meeting (a), (b) and the (c) peak check
constexpr double      fig4_pixel_radius = 1.0;  // pixels, Euclidean
constexpr double      fig4_astro_ratio  = 0.10; // mean astro pixel / cyclic peak
constexpr double      fig4_runtime_s    = 30.0;

constexpr std::size_t identity_trials = 100;
constexpr std::size_t symmetry_trials = 100;

constexpr std::size_t null_seeds     = 100;
constexpr std::size_t null_n_short   = 16384;
constexpr std::size_t null_n_long    = 65536;
constexpr double      null_ratio_lo  = 0.5 * 0.75;
constexpr double      null_ratio_hi  = 0.5 * 1.25;
constexpr std::size_t null_antennas  = 8;

constexpr std::size_t rank_seeds    = 100;
constexpr std::size_t rank_n        = 16384;
constexpr double      rank_cosine   = 0.9;
constexpr double      rank_hit_rate = 0.95;

constexpr double calib_peak_tol    = 1e-9;
constexpr double calib_scaling_tol = 1e-12; // relative to the largest pixel

constexpr std::size_t track_frames     = 20;
constexpr double      track_rate_tol   = 1e-9;
constexpr std::size_t track_trials     = 1000;
constexpr double      track_sigma      = 0.002;
constexpr double      track_lead_s     = 10.0;
constexpr double      track_radius_mul = 3.0;
constexpr double      track_hit_rate   = 0.95;

constexpr std::size_t sched_instances = 200;
constexpr std::size_t flag_instances  = 50;

constexpr double fs_hz = 1.0e6;

struct Verdict {
    bool        pass = false;
    std::string detail;
};

struct Fig4Sources {
    SourceSpec bpsk;
    SourceSpec astro;
};

Fig4Sources fig4_sources(const ScenarioConfig& cfg) {
    Fig4Sources out;
    bool        have_bpsk = false, have_astro = false;
    for (const auto& s : cfg.sources) {
        if (s.kind == SourceKind::Bpsk && !have_bpsk) {
            out.bpsk  = s;
            have_bpsk = true;
        } else if (s.kind == SourceKind::AstroNoise && !have_astro) {
            out.astro  = s;
            have_astro = true;
        }
    }
    if (!have_bpsk || !have_astro) {
        throw std::runtime_error("scenario needs one BPSK and one astro noise source");
    }
    return out;
}

double pixel_distance(const SkymapGrid& g, DirectionLM a, DirectionLM b) { return std::hypot((a.l - b.l) / g.l_step(), (a.m - b.m) / g.m_step()); }

double pixel_value(const Skymap& map, DirectionLM d) {
    const auto [x, y] = map.grid.pixel_coords(d);
    return map.power(static_cast<Eigen::Index>(std::lround(x)), static_cast<Eigen::Index>(std::lround(y)));
}

bool has_peak_near(std::span<const SkyPeak> peaks, const SkymapGrid& g, DirectionLM d) {
    return std::any_of(peaks.begin(), peaks.end(), [&](const SkyPeak& p) { return pixel_distance(g, p.direction, d) <= fig4_pixel_radius; });
}

/// Index of the imaged feature matching (alpha, conjugate), if any.
std::optional<std::size_t> feature_index(const FrameResult& fr, double alpha, bool conjugate, double tol) {
    for (std::size_t k = 0; k < fr.features.size(); ++k) {
        if (fr.features[k].conjugate == conjugate && std::abs(fr.features[k].alpha - alpha) <= tol) {
            return k;
        }
    }
    return std::nullopt;
}

Verdict fig4_reproduction(const fs::path& scenario) {
    const auto   start     = std::chrono::steady_clock::now();
    const auto   base      = load_scenario(scenario);
    const auto   src       = fig4_sources(base);
    const double baud      = src.bpsk.baud_rate;
    const double conj_line = 2.0 * src.bpsk.carrier_offset;
    const auto   bpsk_dir  = src.bpsk.trajectory.start;
    const auto   astro_dir = src.astro.trajectory.start;

    std::size_t hit_a = 0, hit_b = 0, hit_c = 0, ratio_under = 0, lag_maps = 0;
    double      ratio_sum = 0.0, lag_ratio_sum = 0.0;
    for (std::size_t k = 0; k < fig4_seeds; ++k) {
        const auto cfg  = load_scenario(scenario, base.seed + k);
        const auto geom = scenario_geometry(cfg);
        const auto snap = synthesize(frame_scene(cfg, geom, 0));
        const auto fr   = process_frame(cfg, geom, snap, 0);
        const auto step = cfg.alpha_step();

        const auto& mags = fr.spectrum.magnitudes;
        const auto  top  = static_cast<std::size_t>(std::max_element(mags.begin(), mags.end()) - mags.begin());
        hit_a += std::abs(fr.spectrum.alphas[top] - baud) <= step ? 1 : 0;

        const auto classical = locate_peaks(fr.classical, 16);
        hit_b += has_peak_near(classical, fr.classical.grid, bpsk_dir) && has_peak_near(classical, fr.classical.grid, astro_dir) ? 1 : 0;

        if (const auto idx = feature_index(fr, conj_line, true, step)) {
            const Skymap& map  = fr.cyclic_maps[*idx];
            const auto    peak = locate_peaks(map, 1);
            hit_c += !peak.empty() && pixel_distance(map.grid, peak[0].direction, bpsk_dir) <= fig4_pixel_radius ? 1 : 0;
            const double ratio = pixel_value(map, astro_dir) / map.max();
            ratio_sum += ratio;
            ratio_under += ratio < fig4_astro_ratio ? 1 : 0;
        } else {
            ratio_sum += 1.0; // no conjugate feature: the astro source has not disappeared
        }
        if (const auto idx = feature_index(fr, baud, false, step)) {
            lag_ratio_sum += pixel_value(fr.cyclic_maps[*idx], astro_dir) / fr.cyclic_maps[*idx].max();
            ++lag_maps;
        }
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double n       = static_cast<double>(fig4_seeds);
    const double mean_r  = ratio_sum / n;
    const bool   pass    = hit_a >= fig4_hit_rate * n && hit_b >= fig4_hit_rate * n && hit_c >= fig4_hit_rate * n && mean_r < fig4_astro_ratio && elapsed < fig4_runtime_s;
    fmt::print("  info: per-seed astro ratio < {:.2f} in {}/{} seeds; lag-{} non-conjugate map mean ratio {:.3f} over {} seeds\n", fig4_astro_ratio, ratio_under, fig4_seeds,
               base.cyclic.lag, lag_maps ? lag_ratio_sum / static_cast<double>(lag_maps) : std::nan(""), lag_maps);
    return {pass, fmt::format("(a) argmax at baud {}/{}, (b) both classical peaks {}/{}, (c) cyclic peak {}/{} and mean astro/peak {:.3f} (< {:.2f}), {:.1f} s (< {:.0f} s)", hit_a,
                              fig4_seeds, hit_b, fig4_seeds, hit_c, fig4_seeds, mean_r, fig4_astro_ratio, elapsed, fig4_runtime_s)};
}

Verdict zero_alpha_identity() {
    Xoshiro256pp rng(0xa11a);
    std::size_t  equal = 0;
    for (std::size_t t = 0; t < identity_trials; ++t) {
        const std::size_t M    = 2 + static_cast<std::size_t>(rng.uniform01() * 11);
        const std::size_t N    = 64 + static_cast<std::size_t>(rng.uniform01() * 2000);
        const auto        snap = testing_support::random_snapshot(M, N, derive_seed(0xa11a, t), fs_hz);
        equal += cyclic_corr_matrix(snap, 0.0, false).values == corr_matrix(snap).values ? 1 : 0;
    }
    return {equal == identity_trials, fmt::format("{}/{} snapshots bit-identical", equal, identity_trials)};
}

Verdict conjugation_symmetry() {
    Xoshiro256pp rng(0x5e11);
    std::size_t  exact = 0;
    for (std::size_t t = 0; t < symmetry_trials; ++t) {
        const std::size_t M     = 2 + static_cast<std::size_t>(rng.uniform01() * 11);
        const std::size_t N     = 64 + static_cast<std::size_t>(rng.uniform01() * 2000);
        const auto        snap  = testing_support::random_snapshot(M, N, derive_seed(0x5e11, t), fs_hz);
        // Half the trials use alphas on the FFT grid, half arbitrary ones.
        double alpha = (rng.uniform01() - 0.5) * fs_hz;
        if (t % 2 == 0) {
            alpha = std::round(alpha / (fs_hz / static_cast<double>(N))) * (fs_hz / static_cast<double>(N));
        }
        const CMatrix pos = cyclic_corr_matrix(snap, alpha, false).values;
        exact += CMatrix(pos.adjoint()) == cyclic_corr_matrix(snap, -alpha, false).values ? 1 : 0;
    }
    return {exact == symmetry_trials, fmt::format("{}/{} pairs exactly Hermitian-transposed", exact, symmetry_trials)};
}

double median_frobenius(const ArraySnapshot& snap, std::span<const double> alphas) {
    const auto spec = cyclic_spectrum(snap, alphas, false);
    return median(spec.magnitudes);
}

Verdict null_decay() {
    const double step   = fs_hz / static_cast<double>(null_n_short);
    const auto   alphas = alpha_grid(step, 0.5 * fs_hz - step, step);
    std::size_t  inside = 0;
    double       lo = 1e300, hi = 0.0;
    for (std::uint64_t seed = 0; seed < null_seeds; ++seed) {
        const auto   geom = random_geometry(null_antennas, 6.0, 1.4e9, derive_seed(0x4e55, seed));
        SourceSpec   sky;
        sky.snr_db     = 0.0;
        sky.seed       = 5;
        sky.trajectory = TrajectorySpec::fixed({0.3, -0.2});
        double med[2];
        for (int which = 0; which < 2; ++which) {
            const std::size_t N = which == 0 ? null_n_short : null_n_long;
            med[which]          = median_frobenius(synthesize(Scene{geom, {sky}, N, fs_hz, 1.0, derive_seed(seed, N)}), alphas);
        }
        const double ratio = med[1] / med[0];
        lo                 = std::min(lo, ratio);
        hi                 = std::max(hi, ratio);
        inside += ratio >= null_ratio_lo && ratio <= null_ratio_hi ? 1 : 0;
    }
    return {inside == null_seeds, fmt::format("{}/{} seeds with median ratio in [{:.3f}, {:.3f}]; observed [{:.4f}, {:.4f}]", inside, null_seeds, null_ratio_lo, null_ratio_hi, lo, hi)};
}

Verdict rank_collapse(const fs::path& scenario) {
    const auto  base = load_scenario(scenario);
    const auto  src  = fig4_sources(base);
    std::size_t hit_lag = 0, hit_conj = 0;
    double      worst_lag = 1.0, worst_conj = 1.0;
    for (std::uint64_t seed = 0; seed < rank_seeds; ++seed) {
        const auto    geom = random_geometry(base.array.antennas, base.array.aperture_wavelengths, base.array.reference_freq, derive_seed(0x7a4c, seed));
        const auto    snap = synthesize(Scene{geom, base.sources, rank_n, base.sample_rate, base.system_noise_power, derive_seed(0x7a4d, seed)});
        const CVector a    = steering_vector(geom, src.bpsk.trajectory.start);
        for (const bool conj : {false, true}) {
            const double                    alpha = conj ? 2.0 * src.bpsk.carrier_offset : src.bpsk.baud_rate;
            const std::size_t               lag   = conj ? 0 : base.cyclic.lag;
            const Eigen::JacobiSVD<CMatrix> svd(cyclic_corr_matrix(snap, alpha, conj, lag).values, Eigen::ComputeThinU);
            const double                    c = testing_support::cosine(svd.matrixU().col(0), a);
            (conj ? worst_conj : worst_lag) = std::min(conj ? worst_conj : worst_lag, c);
            (conj ? hit_conj : hit_lag) += c >= rank_cosine ? 1 : 0;
        }
    }
    const double need = rank_hit_rate * static_cast<double>(rank_seeds);
    return {hit_lag >= need && hit_conj >= need,
            fmt::format("cosine >= {} in {}/{} seeds (lag {}, alpha = baud) and {}/{} (conjugate, alpha = 2fc); worst {:.4f} / {:.4f}", rank_cosine, hit_lag, rank_seeds,
                        base.cyclic.lag, hit_conj, rank_seeds, worst_lag, worst_conj)};
}

Verdict imaging_calibration() {
    const auto   geom = random_geometry(48, 6.0, 1.4e9, 0xca1b);
    SkymapGrid   grid;
    Xoshiro256pp rng(0xca1c);
    double       worst_peak = 0.0;
    bool         argmax_ok  = true;
    for (int t = 0; t < 10; ++t) {
        std::size_t i = 0, j = 0;
        do {
            i = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(grid.n_l));
            j = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(grid.n_m));
        } while (grid.at(i, j).l * grid.at(i, j).l + grid.at(i, j).m * grid.at(i, j).m > 0.8);
        const CVector a   = steering_vector(geom, grid.at(i, j));
        const auto    map = skymap(CorrMatrix{a * a.adjoint()}, geom, grid);
        Eigen::Index  bi = 0, bj = 0;
        worst_peak = std::max(worst_peak, std::abs(map.power.maxCoeff(&bi, &bj) - 1.0));
        argmax_ok  = argmax_ok && static_cast<std::size_t>(bi) == i && static_cast<std::size_t>(bj) == j;
    }

    CMatrix R = CMatrix::Identity(48, 48);
    for (const auto& [d, p] : {std::pair{DirectionLM{0.2, 0.1}, 1.0}, std::pair{DirectionLM{-0.5, 0.3}, 0.4}, std::pair{DirectionLM{0.1, -0.6}, 2.5}}) {
        const CVector a = steering_vector(geom, d);
        R += p * a * a.adjoint();
    }
    const auto   ref         = skymap(CorrMatrix{R}, geom, grid);
    Eigen::Index ri = 0, rj = 0;
    ref.power.maxCoeff(&ri, &rj);
    double worst_scale = 0.0;
    for (const double c : {1e-3, 0.37, 4.0, 2.5e4}) {
        const auto   scaled = skymap(CorrMatrix{c * R}, geom, grid);
        Eigen::Index si = 0, sj = 0;
        scaled.power.maxCoeff(&si, &sj);
        worst_scale = std::max(worst_scale, (scaled.power - c * ref.power).cwiseAbs().maxCoeff() / (c * ref.max()));
        argmax_ok   = argmax_ok && si == ri && sj == rj;
    }
    const bool pass = worst_peak <= calib_peak_tol && worst_scale <= calib_scaling_tol && argmax_ok;
    return {pass, fmt::format("unit source peak error {:.2e} (<= {:.0e}), scaling error {:.2e} (<= {:.0e}), argmax {}", worst_peak, calib_peak_tol, worst_scale, calib_scaling_tol,
                              argmax_ok ? "invariant" : "moved")};
}

TrackSet track_frames_of(const std::function<DirectionLM(std::size_t)>& where, const TrackerConfig& cfg) {
    TrackSet set;
    for (std::size_t k = 0; k < track_frames; ++k) {
        const std::vector<Detection> frame{{static_cast<double>(k), 3.0e5, false, where(k), 1.0, 0}};
        set = associate(std::move(set), frame, cfg);
    }
    return set;
}

const RfiTrack* longest(const TrackSet& set) {
    const RfiTrack* best = nullptr;
    for (const auto& t : set.tracks) {
        if (best == nullptr || t.history.size() > best->history.size()) {
            best = &t;
        }
    }
    return best;
}

Verdict tracker_criteria() {
    const TrackerConfig cfg;
    // Noiseless fast mover, dyadic rates so the truth is representable.
    const double vl = 0.005859375, vm = -0.001953125;
    const auto   clean    = track_frames_of([&](std::size_t k) { return DirectionLM{-0.2 + vl * static_cast<double>(k), 0.1 + vm * static_cast<double>(k)}; }, cfg);
    const bool   single   = clean.tracks.size() == 1 && clean.tracks[0].history.size() == track_frames;
    const double rate_err = single ? std::max(std::abs(clean.tracks[0].model.rate_l - vl), std::abs(clean.tracks[0].model.rate_m - vm)) : 1.0;
    const bool   fast     = single && clean.tracks[0].motion == MotionClass::Fast;

    bool bounds = class_for_speed(std::nextafter(cfg.stationary_speed, 0.0), cfg) == MotionClass::Stationary &&
                  class_for_speed(cfg.stationary_speed, cfg) == MotionClass::Slow && class_for_speed(cfg.fast_speed, cfg) == MotionClass::Slow &&
                  class_for_speed(std::nextafter(cfg.fast_speed, 1.0), cfg) == MotionClass::Fast;
    // Tracks whose fitted speed lands exactly on a threshold (dyadic data).
    TrackerConfig dyadic;
    dyadic.stationary_speed = 0.25;
    dyadic.fast_speed       = 0.5;
    for (const auto& [speed, expect] : {std::pair{0.25, MotionClass::Slow}, std::pair{0.5, MotionClass::Slow}, std::pair{0.125, MotionClass::Stationary}, std::pair{1.0, MotionClass::Fast}}) {
        RfiTrack t;
        for (int k = 0; k < 5; ++k) {
            t.history.push_back({0.5 * k, {speed * 0.5 * k, 0.0}, 1.0});
        }
        bounds = bounds && classify(t, dyadic) == expect;
    }

    std::size_t good = 0;
    for (std::uint64_t trial = 0; trial < track_trials; ++trial) {
        Xoshiro256pp      rng(derive_seed(0x7ac4, trial));
        const DirectionLM start{0.4 * (rng.uniform01() - 0.5), 0.4 * (rng.uniform01() - 0.5)};
        const double      speed = 2e-4 + 3e-3 * rng.uniform01(), heading = 2.0 * std::numbers::pi * rng.uniform01();
        const double      rl = speed * std::cos(heading), rm = speed * std::sin(heading);
        const auto        set = track_frames_of(
            [&](std::size_t k) {
                const auto n = testing_support::gaussian_offset(rng, track_sigma);
                return DirectionLM{start.l + rl * static_cast<double>(k) + n.l, start.m + rm * static_cast<double>(k) + n.m};
            },
            cfg);
        const RfiTrack* t = longest(set);
        if (t == nullptr || t->motion == MotionClass::Unclassified) {
            continue;
        }
        const double      when  = t->history.back().time + track_lead_s;
        const Prediction  p     = predict(*t, when);
        const DirectionLM truth{start.l + rl * when, start.m + rm * when};
        good += lm_distance(p.direction, truth) < track_radius_mul * p.radius ? 1 : 0;
    }
    const bool pass = single && fast && rate_err <= track_rate_tol && bounds && good >= track_hit_rate * static_cast<double>(track_trials);
    return {pass, fmt::format("noiseless: {} track, rate error {:.1e} (<= {:.0e}), class {}; thresholds {}; noisy: error < {}x radius in {}/{} trials", clean.tracks.size(), rate_err,
                              track_rate_tol, single ? to_string(clean.tracks[0].motion) : "-", bounds ? "exact" : "violated", track_radius_mul, good, track_trials)};
}

bool window_ok(const RiskTable& table, std::size_t p, std::size_t start, std::size_t duration, double cap) {
    for (std::size_t s = start; s < start + duration; ++s) {
        if (s >= table.horizon || !table.visible(p, s) || table.risk[p][s] > cap) {
            return false;
        }
    }
    return true;
}

bool feasible(const RiskTable& table, const std::vector<Program>& programs, const Schedule& s, double cap) {
    std::vector<int> owner(table.horizon, -1);
    for (std::size_t p = 0; p < programs.size(); ++p) {
        if (!s.starts[p]) {
            continue;
        }
        if (!window_ok(table, p, *s.starts[p], programs[p].duration, cap)) {
            return false;
        }
        for (std::size_t k = *s.starts[p]; k < *s.starts[p] + programs[p].duration; ++k) {
            if (owner[k] != -1) {
                return false;
            }
            owner[k] = static_cast<int>(p);
        }
    }
    return true;
}

Verdict scheduler_oracle() {
    std::size_t equal = 0, greedy_ok = 0, valid = 0;
    for (std::uint64_t seed = 0; seed < sched_instances; ++seed) {
        const auto inst   = testing_support::random_instance(derive_seed(0x5c4e, seed));
        const auto table  = build_risk_table(inst.programs, inst.site, inst.horizon, inst.tracks, inst.cfg);
        const auto oracle = testing_support::brute_force(table, inst.programs, inst.cfg.lambda, inst.cfg.risk_cap);
        const auto exact  = schedule(inst.programs, inst.site, inst.horizon, inst.tracks, ScheduleMode::Exact, inst.cfg);
        const auto greedy = schedule(inst.programs, inst.site, inst.horizon, inst.tracks, ScheduleMode::Greedy, inst.cfg);
        equal += exact.objective == oracle.objective ? 1 : 0;
        greedy_ok += greedy.objective >= exact.objective ? 1 : 0;
        valid += feasible(table, inst.programs, exact, inst.cfg.risk_cap) && feasible(table, inst.programs, greedy, inst.cfg.risk_cap) ? 1 : 0;
    }
    const bool pass = equal == sched_instances && greedy_ok == sched_instances && valid == sched_instances;
    return {pass, fmt::format("exact == brute force {}/{}, greedy >= exact {}/{}, feasible windows only {}/{}", equal, sched_instances, greedy_ok, sched_instances, valid,
                              sched_instances)};
}

Schedule pointing_schedule(const std::vector<std::optional<DirectionLM>>& pointing) {
    Schedule s;
    for (const auto& p : pointing) {
        s.assignment.push_back(p ? std::optional<int>(1) : std::nullopt);
        s.pointing.push_back(p);
        s.risk.push_back(0.0);
    }
    return s;
}

Verdict flag_mask_soundness() {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::uint64_t seed = 0; seed < flag_instances; ++seed) {
        Xoshiro256pp rng(derive_seed(0xf1a6, seed));
        const auto   uni = [&](double a, double b) { return a + (b - a) * rng.uniform01(); };
        SiteModel    site;
        site.slot_length = uni(1.0, 5.0);
        site.start_time  = uni(0.5, 3.0);
        const std::size_t horizon = 12;

        // Noiseless fast movers: history is exact, so the prediction radius is zero.
        std::vector<RfiTrack> tracks;
        std::vector<BandRule> bands;
        for (std::uint64_t k = 0; k < 2; ++k) {
            const double speed = uni(0.01, 0.05), heading = uni(0.0, 2.0 * std::numbers::pi);
            tracks.push_back(testing_support::synthetic_track(k + 1, {uni(-0.4, 0.4), uni(-0.4, 0.4)}, speed * std::cos(heading), speed * std::sin(heading)));
            const double lo = uni(1.0e9, 1.008e9);
            bands.push_back({tracks.back().alpha, false, 1.0, lo, lo + uni(1e5, 3e6)});
        }
        std::vector<std::optional<DirectionLM>> pointing(horizon);
        for (auto& p : pointing) {
            if (rng.uniform01() < 0.85) {
                p = DirectionLM{uni(-0.5, 0.5), uni(-0.5, 0.5)};
            }
        }
        const double        excl = uni(0.05, 0.25);
        const ChannelConfig channels{1.0e9, 1.0e6, 10};
        const auto          mask = flag_mask(tracks, pointing_schedule(pointing), site, excl, channels, bands);

        for (std::size_t s = 0; s < horizon; ++s) {
            for (std::size_t c = 0; c < channels.count; ++c) {
                bool truth = false;
                for (std::size_t k = 0; k < tracks.size() && pointing[s]; ++k) {
                    // Ground truth straight from the generating line, t = 0 at the last history point.
                    const auto&       h = tracks[k].history;
                    const double      t = site.slot_time(s);
                    const double      rl = h[1].direction.l - h[0].direction.l, rm = h[1].direction.m - h[0].direction.m;
                    const DirectionLM pos{h.back().direction.l + rl * t, h.back().direction.m + rm * t};
                    const double      lo = channels.start_hz + static_cast<double>(c) * channels.width_hz;
                    truth = truth || (pos.visible() && std::hypot(pos.l - pointing[s]->l, pos.m - pointing[s]->m) < excl && lo < bands[k].f_hi && bands[k].f_lo < lo + channels.width_hz);
                }
                const bool flagged = mask.at(s, c);
                tp += truth && flagged ? 1 : 0;
                fp += !truth && flagged ? 1 : 0;
                fn += truth && !flagged ? 1 : 0;
            }
        }
    }

    std::size_t monotone = 0;
    for (std::uint64_t seed = 0; seed < flag_instances; ++seed) {
        const auto inst  = testing_support::random_instance(derive_seed(0x3070, seed));
        auto       tracks = inst.tracks;
        Xoshiro256pp rng(derive_seed(0x3071, seed));
        // Ensure fast movers exist so the mask is not trivially empty.
        tracks.push_back(testing_support::synthetic_track(9, {rng.uniform01() - 0.5, rng.uniform01() - 0.5}, 0.01 * (rng.uniform01() + 0.5), -0.01 * rng.uniform01()));
        const auto   sched = schedule(inst.programs, inst.site, inst.horizon, tracks, ScheduleMode::Greedy, inst.cfg);
        bool         ok    = true;
        FlagMask     prev;
        for (const double r : {0.02, 0.05, 0.1, 0.2, 0.4, 0.8}) {
            const auto mask = flag_mask(tracks, sched, inst.site, r, ChannelConfig{1.0e9, 1.0e7, 40});
            if (!prev.cells.empty()) {
                for (std::size_t i = 0; i < mask.cells.size(); ++i) {
                    ok = ok && prev.cells[i] <= mask.cells[i];
                }
            }
            prev = mask;
        }
        monotone += ok ? 1 : 0;
    }
    const double precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
    const double recall    = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
    const bool   pass      = fp == 0 && fn == 0 && tp > 0 && monotone == flag_instances;
    return {pass, fmt::format("{} corrupted cells, precision {:.3f}, recall {:.3f}; monotone in radius {}/{}", tp + fn, precision, recall, monotone, flag_instances)};
}

std::vector<fs::path> artifact_files(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file() && e.path().filename() != "manifest.json") {
            files.push_back(fs::relative(e.path(), root));
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

Verdict determinism(const fs::path& scenario, const fs::path& scratch) {
    const auto cfg = load_scenario(scenario);
    const auto a   = scratch / "run_a";
    const auto b   = scratch / "run_b";
    fs::remove_all(a);
    fs::remove_all(b);
    (void)run_to_directory(cfg, a);
    (void)run_to_directory(cfg, b);
    const auto  fa = artifact_files(a);
    const auto  fb = artifact_files(b);
    std::size_t same = 0, csv = 0, json = 0, pgm = 0;
    for (const auto& f : fa) {
        const auto ext = f.extension();
        csv += ext == ".csv" ? 1 : 0;
        json += ext == ".json" ? 1 : 0;
        pgm += ext == ".pgm" ? 1 : 0;
        if (fs::exists(b / f) && io::detail::slurp(a / f) == io::detail::slurp(b / f)) {
            ++same;
        }
    }
    const bool pass = fa == fb && same == fa.size() && csv > 0 && json > 0 && pgm > 0;
    return {pass, fmt::format("{}/{} files byte-identical ({} csv, {} json, {} pgm; manifest excluded)", same, fa.size(), csv, json, pgm)};
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        fmt::print(stderr, "usage: acceptance <fig4.scenario> <scratch directory>\n");
        return 2;
    }
    const fs::path scenario(argv[1]);
    const fs::path scratch(argv[2]);
    fs::create_directories(scratch);

    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"fig4 reproduction", [&] { return fig4_reproduction(scenario); }},
        {"alpha = 0 identity", zero_alpha_identity},
        {"conjugation symmetry", conjugation_symmetry},
        {"stationary null decay", null_decay},
        {"rank collapse", [&] { return rank_collapse(scenario); }},
        {"imaging calibration", imaging_calibration},
        {"tracker", tracker_criteria},
        {"scheduler oracle equivalence", scheduler_oracle},
        {"flag-mask soundness", flag_mask_soundness},
        {"determinism", [&] { return determinism(scenario, scratch); }},
    };
    std::size_t passed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = {false, fmt::format("threw: {}", e.what())};
        }
        passed += v.pass ? 1 : 0;
        fmt::print("criterion {:2d} {:<30} {}  {}\n", k + 1, criteria[k].first, v.pass ? "PASS" : "FAIL", v.detail);
        std::fflush(stdout);
    }
    fmt::print("acceptance: {}/{} criteria passed\n", passed, criteria.size());
    return passed == criteria.size() ? 0 : 1;
}
