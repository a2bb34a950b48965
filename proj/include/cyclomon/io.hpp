#ifndef CYCLOMON_IO_HPP
#define CYCLOMON_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include <cyclomon/arraysim.hpp>
#include <cyclomon/cyclospec.hpp>
#include <cyclomon/imaging.hpp>
#include <cyclomon/sched.hpp>
#include <cyclomon/tracker.hpp>

namespace cyclomon::io {

using json = nlohmann::json;

/// Malformed or unreadable artifact.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string num(double v) { return fmt::format("{:.17g}", v); }

inline double parse_double(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double      v    = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw FormatError(fmt::format("{}: '{}' is not a number", where, s));
    }
    if (used != s.size()) {
        throw FormatError(fmt::format("{}: trailing characters in '{}'", where, s));
    }
    return v;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string              cell;
    std::istringstream       in(line);
    while (std::getline(in, cell, sep)) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

/// Parses "# k1=v1,k2=v2" (or space separated) into a map.
inline std::map<std::string, std::string> parse_header(const std::string& line) {
    if (line.rfind("# ", 0) != 0) {
        throw FormatError(fmt::format("expected a '# ' header line, got '{}'", line));
    }
    std::map<std::string, std::string> kv;
    std::string                        body = line.substr(2);
    std::replace(body.begin(), body.end(), ',', ' ');
    std::istringstream in(body);
    std::string        token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq != std::string::npos) {
            kv[token.substr(0, eq)] = token.substr(eq + 1);
        }
    }
    return kv;
}

inline const std::string& require_key(const std::map<std::string, std::string>& kv, const std::string& key, const std::string& what) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        throw FormatError(fmt::format("{}: header is missing '{}'", what, key));
    }
    return it->second;
}

inline std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
    }
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) {
        throw FormatError(fmt::format("cannot open {}", path.string()));
    }
    return in;
}

inline std::string slurp(const std::filesystem::path& path) {
    auto               in = open_in(path, true);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json direction_json(const std::optional<DirectionLM>& d) { return d ? json::array({d->l, d->m}) : json(nullptr); }

inline std::optional<DirectionLM> direction_from(const json& j) {
    if (j.is_null()) {
        return std::nullopt;
    }
    return DirectionLM{j.at(0).get<double>(), j.at(1).get<double>()};
}

} // namespace detail

// ---------------------------------------------------------------- spectra

/// `# conjugate=<0|1>,lag=<n>` then `alpha_hz,magnitude` rows.
inline void write_spectrum(const std::filesystem::path& path, const CyclicSpectrum& spec) {
    auto out = detail::open_out(path);
    out << fmt::format("# conjugate={},lag={}\n", spec.conjugate ? 1 : 0, spec.lag);
    out << "alpha_hz,magnitude\n";
    for (std::size_t i = 0; i < spec.alphas.size(); ++i) {
        out << detail::num(spec.alphas[i]) << ',' << detail::num(spec.magnitudes[i]) << '\n';
    }
}

[[nodiscard]] inline CyclicSpectrum read_spectrum(const std::filesystem::path& path) {
    auto        in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(fmt::format("{}: empty file", path.string()));
    }
    const auto     kv = detail::parse_header(line);
    CyclicSpectrum spec;
    spec.conjugate = detail::require_key(kv, "conjugate", path.string()) == "1";
    spec.lag       = static_cast<std::size_t>(std::stoull(detail::require_key(kv, "lag", path.string())));
    if (!std::getline(in, line) || line != "alpha_hz,magnitude") {
        throw FormatError(fmt::format("{}: missing column header", path.string()));
    }
    while (std::getline(in, line)) {
        const auto cells = detail::split(line, ',');
        if (cells.size() != 2) {
            throw FormatError(fmt::format("{}: expected 2 columns in '{}'", path.string(), line));
        }
        spec.alphas.push_back(detail::parse_double(cells[0], path.string()));
        spec.magnitudes.push_back(detail::parse_double(cells[1], path.string()));
    }
    return spec;
}

// ---------------------------------------------------------------- array geometry

/// `# reference_freq_hz=<f>` then `x_m,y_m` rows, one per antenna.
inline void write_array(const std::filesystem::path& path, const ArrayGeometry& geom) {
    auto out = detail::open_out(path);
    out << "# reference_freq_hz=" << detail::num(geom.reference_freq) << '\n';
    out << "x_m,y_m\n";
    for (const auto& p : geom.positions) {
        out << detail::num(p.x) << ',' << detail::num(p.y) << '\n';
    }
}

[[nodiscard]] inline ArrayGeometry read_array(const std::filesystem::path& path) {
    auto        in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(fmt::format("{}: empty file", path.string()));
    }
    ArrayGeometry geom;
    geom.reference_freq = detail::parse_double(detail::require_key(detail::parse_header(line), "reference_freq_hz", path.string()), path.string());
    if (!std::getline(in, line) || line != "x_m,y_m") {
        throw FormatError(fmt::format("{}: missing column header", path.string()));
    }
    while (std::getline(in, line)) {
        const auto cells = detail::split(line, ',');
        if (cells.size() != 2) {
            throw FormatError(fmt::format("{}: expected 2 columns in '{}'", path.string(), line));
        }
        geom.positions.push_back({detail::parse_double(cells[0], path.string()), detail::parse_double(cells[1], path.string())});
    }
    geom.validate();
    return geom;
}

// ---------------------------------------------------------------- snapshots

/// One row per antenna of interleaved `re,im` pairs after a
/// `# cyclomon-snapshot v1 antennas=M samples=N sample_rate=fs t0=t` header.
inline void write_snapshot(const std::filesystem::path& path, const ArraySnapshot& snap) {
    auto out = detail::open_out(path);
    out << fmt::format("# cyclomon-snapshot v1 antennas={} samples={} sample_rate={} t0={}\n", snap.antennas(), snap.samples(), detail::num(snap.sample_rate), detail::num(snap.t0));
    for (Eigen::Index m = 0; m < snap.data.rows(); ++m) {
        std::string row;
        for (Eigen::Index k = 0; k < snap.data.cols(); ++k) {
            if (k > 0) {
                row += ',';
            }
            row += detail::num(snap.data(m, k).real());
            row += ',';
            row += detail::num(snap.data(m, k).imag());
        }
        out << row << '\n';
    }
}

[[nodiscard]] inline ArraySnapshot read_snapshot(const std::filesystem::path& path) {
    auto        in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# cyclomon-snapshot v1 ", 0) != 0) {
        throw FormatError(fmt::format("{}: not a cyclomon snapshot", path.string()));
    }
    const auto        kv = detail::parse_header(line);
    const std::size_t M  = std::stoull(detail::require_key(kv, "antennas", path.string()));
    const std::size_t N  = std::stoull(detail::require_key(kv, "samples", path.string()));
    ArraySnapshot     snap;
    snap.sample_rate = detail::parse_double(detail::require_key(kv, "sample_rate", path.string()), path.string());
    snap.t0          = detail::parse_double(detail::require_key(kv, "t0", path.string()), path.string());
    snap.data.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(N));
    for (std::size_t m = 0; m < M; ++m) {
        if (!std::getline(in, line)) {
            throw FormatError(fmt::format("{}: expected {} antenna rows", path.string(), M));
        }
        const auto cells = detail::split(line, ',');
        if (cells.size() != 2 * N) {
            throw FormatError(fmt::format("{}: antenna {} has {} values, expected {}", path.string(), m, cells.size(), 2 * N));
        }
        for (std::size_t k = 0; k < N; ++k) {
            snap.data(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = {detail::parse_double(cells[2 * k], path.string()), detail::parse_double(cells[2 * k + 1], path.string())};
        }
    }
    return snap;
}

// ---------------------------------------------------------------- skymaps

/// CSV of pixel powers: row r holds m index n_m - 1 - r (top row is m_max),
/// column c holds l index c. Same orientation as the PGM.
inline void write_skymap_csv(const std::filesystem::path& path, const Skymap& map) {
    auto out = detail::open_out(path);
    for (std::size_t r = 0; r < map.grid.n_m; ++r) {
        const auto j = static_cast<Eigen::Index>(map.grid.n_m - 1 - r);
        std::string row;
        for (std::size_t i = 0; i < map.grid.n_l; ++i) {
            if (i > 0) {
                row += ',';
            }
            row += detail::num(map.power(static_cast<Eigen::Index>(i), j));
        }
        out << row << '\n';
    }
}

/// key=value lines: kind, alpha_hz, lag, grid bounds and size, and the PGM scale.
inline void write_skymap_sidecar(const std::filesystem::path& path, const Skymap& map) {
    auto out = detail::open_out(path);
    out << "format=cyclomon-skymap v1\n";
    out << "kind=" << to_string(map.kind) << '\n';
    out << "alpha_hz=" << detail::num(map.alpha) << '\n';
    out << "lag=" << map.lag << '\n';
    out << "l_min=" << detail::num(map.grid.l_min) << '\n';
    out << "l_max=" << detail::num(map.grid.l_max) << '\n';
    out << "m_min=" << detail::num(map.grid.m_min) << '\n';
    out << "m_max=" << detail::num(map.grid.m_max) << '\n';
    out << "n_l=" << map.grid.n_l << '\n';
    out << "n_m=" << map.grid.n_m << '\n';
    out << "scale=" << detail::num(std::max(0.0, map.max())) << '\n';
}

/// Binary P5, maxval 65535, big-endian. Pixel value round(65535 * p / scale)
/// with scale = map maximum; an all-zero map encodes as zeros.
inline void write_skymap_pgm(const std::filesystem::path& path, const Skymap& map) {
    auto         out   = detail::open_out(path, true);
    const double scale = std::max(0.0, map.max());
    out << "P5\n" << map.grid.n_l << ' ' << map.grid.n_m << "\n65535\n";
    std::vector<char> bytes;
    bytes.reserve(2 * map.grid.n_l * map.grid.n_m);
    for (std::size_t r = 0; r < map.grid.n_m; ++r) {
        const auto j = static_cast<Eigen::Index>(map.grid.n_m - 1 - r);
        for (std::size_t i = 0; i < map.grid.n_l; ++i) {
            const double   v    = scale > 0.0 ? std::clamp(map.power(static_cast<Eigen::Index>(i), j) / scale, 0.0, 1.0) : 0.0;
            const auto     code = static_cast<std::uint16_t>(std::lround(v * 65535.0));
            bytes.push_back(static_cast<char>(code >> 8));
            bytes.push_back(static_cast<char>(code & 0xff));
        }
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

/// Writes `<stem>.csv`, `<stem>.pgm` and `<stem>.txt`.
inline void write_skymap(const std::filesystem::path& stem, const Skymap& map) {
    write_skymap_csv(std::filesystem::path(stem).concat(".csv"), map);
    write_skymap_pgm(std::filesystem::path(stem).concat(".pgm"), map);
    write_skymap_sidecar(std::filesystem::path(stem).concat(".txt"), map);
}

/// Reads `<stem>.txt` and `<stem>.csv` back into a Skymap.
[[nodiscard]] inline Skymap read_skymap(const std::filesystem::path& stem) {
    const auto                         sidecar = std::filesystem::path(stem).concat(".txt");
    auto                               meta_in = detail::open_in(sidecar);
    std::map<std::string, std::string> kv;
    std::string                        line;
    while (std::getline(meta_in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    const std::string where = sidecar.string();
    Skymap            map;
    const auto&       kind = detail::require_key(kv, "kind", where);
    if (kind == "classical") {
        map.kind = SkymapKind::Classical;
    } else if (kind == "cyclic") {
        map.kind = SkymapKind::Cyclic;
    } else if (kind == "conjugate_cyclic") {
        map.kind = SkymapKind::ConjugateCyclic;
    } else {
        throw FormatError(fmt::format("{}: unknown kind '{}'", where, kind));
    }
    map.alpha      = detail::parse_double(detail::require_key(kv, "alpha_hz", where), where);
    map.lag        = std::stoull(detail::require_key(kv, "lag", where));
    map.grid.l_min = detail::parse_double(detail::require_key(kv, "l_min", where), where);
    map.grid.l_max = detail::parse_double(detail::require_key(kv, "l_max", where), where);
    map.grid.m_min = detail::parse_double(detail::require_key(kv, "m_min", where), where);
    map.grid.m_max = detail::parse_double(detail::require_key(kv, "m_max", where), where);
    map.grid.n_l   = std::stoull(detail::require_key(kv, "n_l", where));
    map.grid.n_m   = std::stoull(detail::require_key(kv, "n_m", where));
    map.grid.validate();

    const auto csv = std::filesystem::path(stem).concat(".csv");
    auto       in  = detail::open_in(csv);
    map.power.resize(static_cast<Eigen::Index>(map.grid.n_l), static_cast<Eigen::Index>(map.grid.n_m));
    for (std::size_t r = 0; r < map.grid.n_m; ++r) {
        if (!std::getline(in, line)) {
            throw FormatError(fmt::format("{}: expected {} rows", csv.string(), map.grid.n_m));
        }
        const auto cells = detail::split(line, ',');
        if (cells.size() != map.grid.n_l) {
            throw FormatError(fmt::format("{}: row {} has {} values, expected {}", csv.string(), r, cells.size(), map.grid.n_l));
        }
        for (std::size_t i = 0; i < map.grid.n_l; ++i) {
            map.power(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(map.grid.n_m - 1 - r)) = detail::parse_double(cells[i], csv.string());
        }
    }
    return map;
}

struct PgmImage {
    std::size_t                width  = 0;
    std::size_t                height = 0;
    std::vector<std::uint16_t> pixels; // row-major, top row first
};

[[nodiscard]] inline PgmImage read_pgm(const std::filesystem::path& path) {
    const std::string  raw = detail::slurp(path);
    std::istringstream in(raw);
    std::string        magic;
    std::size_t        maxval = 0;
    PgmImage           img;
    in >> magic >> img.width >> img.height >> maxval;
    if (magic != "P5" || maxval != 65535 || !in) {
        throw FormatError(fmt::format("{}: not a 16-bit P5 image", path.string()));
    }
    in.get();
    const auto offset = static_cast<std::size_t>(in.tellg());
    if (raw.size() != offset + 2 * img.width * img.height) {
        throw FormatError(fmt::format("{}: pixel payload has the wrong size", path.string()));
    }
    img.pixels.resize(img.width * img.height);
    for (std::size_t k = 0; k < img.pixels.size(); ++k) {
        const auto hi  = static_cast<unsigned char>(raw[offset + 2 * k]);
        const auto lo  = static_cast<unsigned char>(raw[offset + 2 * k + 1]);
        img.pixels[k] = static_cast<std::uint16_t>((hi << 8) | lo);
    }
    return img;
}

// ---------------------------------------------------------------- track logs

[[nodiscard]] inline json track_json(const RfiTrack& t) {
    json history = json::array();
    for (const auto& p : t.history) {
        history.push_back({{"t", p.time}, {"l", p.direction.l}, {"m", p.direction.m}, {"power", p.power}});
    }
    return {{"id", t.id},
            {"alpha_hz", t.alpha},
            {"conjugate", t.conjugate},
            {"lag", t.lag},
            {"motion", to_string(t.motion)},
            {"missed", t.missed},
            {"model",
             {{"t_ref", t.model.t_ref},
              {"l0", t.model.l0},
              {"m0", t.model.m0},
              {"rate_l", t.model.rate_l},
              {"rate_m", t.model.rate_m},
              {"residual_rms", t.model.residual_rms},
              {"points", t.model.points}}},
            {"history", std::move(history)}};
}

[[nodiscard]] inline RfiTrack track_from_json(const json& j) {
    RfiTrack t;
    t.id         = j.at("id").get<std::uint64_t>();
    t.alpha      = j.at("alpha_hz").get<double>();
    t.conjugate  = j.at("conjugate").get<bool>();
    t.lag        = j.at("lag").get<std::size_t>();
    t.missed     = j.at("missed").get<std::size_t>();
    const auto m = motion_class_from_string(j.at("motion").get<std::string>());
    if (!m) {
        throw FormatError(fmt::format("track {}: unknown motion class", t.id));
    }
    t.motion           = *m;
    const json& model  = j.at("model");
    t.model.t_ref        = model.at("t_ref").get<double>();
    t.model.l0           = model.at("l0").get<double>();
    t.model.m0           = model.at("m0").get<double>();
    t.model.rate_l       = model.at("rate_l").get<double>();
    t.model.rate_m       = model.at("rate_m").get<double>();
    t.model.residual_rms = model.at("residual_rms").get<double>();
    t.model.points       = model.at("points").get<std::size_t>();
    for (const auto& p : j.at("history")) {
        t.history.push_back({p.at("t").get<double>(), {p.at("l").get<double>(), p.at("m").get<double>()}, p.at("power").get<double>()});
    }
    if (t.history.empty()) {
        throw FormatError(fmt::format("track {}: empty history", t.id));
    }
    return t;
}

/// Track state after one frame, with that frame's detections and full
/// histories so the planner can resume from the file.
inline void write_track_log(const std::filesystem::path& path, const TrackSet& set, std::size_t frame, double time, std::span<const Detection> detections = {}) {
    json tracks = json::array();
    for (const auto& t : set.tracks) {
        tracks.push_back(track_json(t));
    }
    json dets = json::array();
    for (const auto& d : detections) {
        dets.push_back({{"alpha_hz", d.alpha}, {"conjugate", d.conjugate}, {"lag", d.lag}, {"l", d.direction.l}, {"m", d.direction.m}, {"power", d.power}});
    }
    const json doc = {{"format", "cyclomon.tracks/1"}, {"frame", frame}, {"time_s", time}, {"next_id", set.next_id}, {"detections", std::move(dets)}, {"tracks", std::move(tracks)}};
    detail::open_out(path) << doc.dump(2) << '\n';
}

[[nodiscard]] inline TrackSet read_track_log(const std::filesystem::path& path) {
    try {
        const json doc = json::parse(detail::slurp(path));
        if (doc.at("format") != "cyclomon.tracks/1") {
            throw FormatError(fmt::format("{}: not a track log", path.string()));
        }
        TrackSet set;
        set.next_id = doc.at("next_id").get<std::uint64_t>();
        for (const auto& t : doc.at("tracks")) {
            set.tracks.push_back(track_from_json(t));
        }
        return set;
    } catch (const json::exception& e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

// ---------------------------------------------------------------- schedules

inline void write_schedule(const std::filesystem::path& path, const Schedule& s, std::span<const Program> programs, const SiteModel& site) {
    json slots = json::array();
    for (std::size_t k = 0; k < s.horizon(); ++k) {
        slots.push_back({{"slot", k},
                         {"time_s", site.slot_time(k)},
                         {"program", s.assignment[k] ? json(*s.assignment[k]) : json(nullptr)},
                         {"pointing", detail::direction_json(s.pointing[k])},
                         {"risk", s.risk[k]}});
    }
    json progs = json::array();
    for (std::size_t p = 0; p < programs.size(); ++p) {
        progs.push_back({{"id", programs[p].id}, {"duration", programs[p].duration}, {"priority", programs[p].priority}, {"start", s.starts[p] ? json(*s.starts[p]) : json(nullptr)}});
    }
    const json doc = {{"format", "cyclomon.schedule/1"},
                      {"mode", to_string(s.mode)},
                      {"horizon", s.horizon()},
                      {"slot_length_s", site.slot_length},
                      {"start_time_s", site.start_time},
                      {"objective", s.objective},
                      {"total_risk", s.total_risk},
                      {"slots", std::move(slots)},
                      {"programs", std::move(progs)},
                      {"unscheduled", s.unscheduled},
                      {"diagnostics", s.diagnostics}};
    detail::open_out(path) << doc.dump(2) << '\n';
}

[[nodiscard]] inline Schedule read_schedule(const std::filesystem::path& path) {
    try {
        const json doc = json::parse(detail::slurp(path));
        if (doc.at("format") != "cyclomon.schedule/1") {
            throw FormatError(fmt::format("{}: not a schedule", path.string()));
        }
        Schedule s;
        s.mode       = doc.at("mode") == "exact" ? ScheduleMode::Exact : ScheduleMode::Greedy;
        s.objective  = doc.at("objective").get<double>();
        s.total_risk = doc.at("total_risk").get<double>();
        for (const auto& slot : doc.at("slots")) {
            s.assignment.push_back(slot.at("program").is_null() ? std::nullopt : std::optional<int>(slot.at("program").get<int>()));
            s.pointing.push_back(detail::direction_from(slot.at("pointing")));
            s.risk.push_back(slot.at("risk").get<double>());
        }
        for (const auto& p : doc.at("programs")) {
            s.starts.push_back(p.at("start").is_null() ? std::nullopt : std::optional<std::size_t>(p.at("start").get<std::size_t>()));
        }
        s.unscheduled = doc.at("unscheduled").get<std::vector<int>>();
        s.diagnostics = doc.at("diagnostics").get<std::vector<std::string>>();
        return s;
    } catch (const json::exception& e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

// ---------------------------------------------------------------- flag masks

/// `# slot_length_s=..,channel_width_hz=..,channel_start_hz=..` then one
/// row of 0/1 per slot, one column per channel.
inline void write_flag_mask(const std::filesystem::path& path, const FlagMask& mask) {
    auto out = detail::open_out(path);
    out << fmt::format("# slot_length_s={},channel_width_hz={},channel_start_hz={}\n", detail::num(mask.slot_length), detail::num(mask.channel_width), detail::num(mask.channel_start));
    for (std::size_t s = 0; s < mask.n_slots; ++s) {
        std::string row;
        for (std::size_t c = 0; c < mask.n_channels; ++c) {
            if (c > 0) {
                row += ',';
            }
            row += mask.at(s, c) ? '1' : '0';
        }
        out << row << '\n';
    }
}

[[nodiscard]] inline FlagMask read_flag_mask(const std::filesystem::path& path) {
    auto        in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(fmt::format("{}: empty file", path.string()));
    }
    const auto kv = detail::parse_header(line);
    FlagMask   mask;
    mask.slot_length   = detail::parse_double(detail::require_key(kv, "slot_length_s", path.string()), path.string());
    mask.channel_width = detail::parse_double(detail::require_key(kv, "channel_width_hz", path.string()), path.string());
    mask.channel_start = detail::parse_double(detail::require_key(kv, "channel_start_hz", path.string()), path.string());
    while (std::getline(in, line)) {
        const auto cells = detail::split(line, ',');
        if (mask.n_slots == 0) {
            mask.n_channels = cells.size();
        } else if (cells.size() != mask.n_channels) {
            throw FormatError(fmt::format("{}: ragged row {}", path.string(), mask.n_slots));
        }
        for (const auto& c : cells) {
            if (c != "0" && c != "1") {
                throw FormatError(fmt::format("{}: cells must be 0 or 1", path.string()));
            }
            mask.cells.push_back(c == "1" ? 1 : 0);
        }
        ++mask.n_slots;
    }
    return mask;
}

} // namespace cyclomon::io

#endif // CYCLOMON_IO_HPP
