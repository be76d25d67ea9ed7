#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "arms/errors.hpp"
#include "arms/types.hpp"

namespace arms {

// ---------------------------------------------------------------------------
// Text formats.
//
// Event file:      x,y,t,p          (t in integer microseconds, p in {0,1})
// Local-flow file: x,y,t,vx,vy,mag  (mag optional on input)
// Flow file:       x,y,t,vx,vy,window
//
// All are UTF-8 text, one record per line, '#' starts a comment line.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(pos)));
            break;
        }
        out.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

template <typename Int>
Int parse_int(std::string_view field, std::size_t line_no, const char* what) {
    Int value{};
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" +
                         std::string(field) + "'");
    return value;
}

inline double parse_double(std::string_view field, std::size_t line_no, const char* what) {
    std::string buf(field);
    char* endp = nullptr;
    const double v = std::strtod(buf.c_str(), &endp);
    if (buf.empty() || endp != buf.c_str() + buf.size() || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" + buf + "'");
    return v;
}

inline bool skippable(std::string_view line) {
    return line.empty() || line.front() == '#';
}

} // namespace detail

/// Parses a raw event stream. Events must be within the sensor geometry and
/// timestamps must be non-decreasing; violations are reported with their
/// line number.
inline std::vector<RawEvent> parse_events(std::istream& in, const SensorGeometry& geometry) {
    validate(geometry);
    std::vector<RawEvent> events;
    std::string line;
    std::size_t line_no = 0;
    std::int64_t last_t = std::numeric_limits<std::int64_t>::min();
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view sv = detail::trim(line);
        if (detail::skippable(sv)) continue;
        const auto fields = detail::split_csv(sv);
        if (fields.size() != 4)
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields x,y,t,p, got " +
                             std::to_string(fields.size()));
        RawEvent e;
        e.x = detail::parse_int<int>(fields[0], line_no, "x");
        e.y = detail::parse_int<int>(fields[1], line_no, "y");
        e.t = detail::parse_int<std::int64_t>(fields[2], line_no, "t");
        e.p = detail::parse_int<int>(fields[3], line_no, "p");
        if (!geometry.contains(e.x, e.y))
            throw ParseError("line " + std::to_string(line_no) + ": coordinate (" +
                             std::to_string(e.x) + "," + std::to_string(e.y) +
                             ") outside " + std::to_string(geometry.width) + "x" +
                             std::to_string(geometry.height) + " sensor");
        if (e.t < 0)
            throw ParseError("line " + std::to_string(line_no) + ": negative timestamp");
        if (e.t < last_t)
            throw ParseError("line " + std::to_string(line_no) + ": decreasing timestamp " +
                             std::to_string(e.t) + " after " + std::to_string(last_t));
        if (e.p != 0 && e.p != 1)
            throw ParseError("line " + std::to_string(line_no) + ": polarity must be 0 or 1, got " +
                             std::to_string(e.p));
        last_t = e.t;
        events.push_back(e);
    }
    return events;
}

inline void write_events(const std::vector<RawEvent>& events, std::ostream& out) {
    for (const auto& e : events) {
        out << e.x << ',' << e.y << ',' << e.t << ',' << e.p << '\n';
    }
    if (!out) throw IoError("failed writing event stream");
}

/// Parses local-flow events. The trailing magnitude field is optional and is
/// recomputed from (vx, vy) when absent; when present it must agree with the
/// components to 1e-6 relative.
inline std::vector<LocalFlowEvent> parse_local_flow(std::istream& in) {
    std::vector<LocalFlowEvent> events;
    std::string line;
    std::size_t line_no = 0;
    std::int64_t last_t = std::numeric_limits<std::int64_t>::min();
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view sv = detail::trim(line);
        if (detail::skippable(sv)) continue;
        const auto fields = detail::split_csv(sv);
        if (fields.size() != 5 && fields.size() != 6)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected x,y,t,vx,vy[,mag], got " + std::to_string(fields.size()) +
                             " fields");
        LocalFlowEvent e;
        e.x = detail::parse_int<int>(fields[0], line_no, "x");
        e.y = detail::parse_int<int>(fields[1], line_no, "y");
        e.t = detail::parse_int<std::int64_t>(fields[2], line_no, "t");
        e.vx = detail::parse_double(fields[3], line_no, "vx");
        e.vy = detail::parse_double(fields[4], line_no, "vy");
        const double recomputed = std::hypot(e.vx, e.vy);
        if (fields.size() == 6) {
            e.mag = detail::parse_double(fields[5], line_no, "mag");
            if (std::abs(e.mag - recomputed) > 1e-6 * std::max(recomputed, 1e-300))
                throw ParseError("line " + std::to_string(line_no) + ": mag " +
                                 std::to_string(e.mag) + " inconsistent with components");
        } else {
            e.mag = recomputed;
        }
        if (!(e.mag > 0.0))
            throw ParseError("line " + std::to_string(line_no) + ": zero-magnitude flow event");
        if (e.t < last_t)
            throw ParseError("line " + std::to_string(line_no) + ": decreasing timestamp");
        last_t = e.t;
        events.push_back(e);
    }
    return events;
}

inline void write_local_flow(const std::vector<LocalFlowEvent>& events, std::ostream& out) {
    char buf[160];
    for (const auto& e : events) {
        std::snprintf(buf, sizeof buf, "%d,%d,%lld,%.9g,%.9g,%.9g\n", e.x, e.y,
                      static_cast<long long>(e.t), e.vx, e.vy, e.mag);
        out << buf;
    }
    if (!out) throw IoError("failed writing local-flow stream");
}

/// Writes true-flow results, one `x,y,t,vx,vy,window` line each. Components
/// are printed with six decimal places; a write-then-parse round trip
/// reproduces them to that precision.
inline void write_flow(const std::vector<TrueFlowResult>& results, std::ostream& out) {
    char buf[160];
    for (const auto& r : results) {
        std::snprintf(buf, sizeof buf, "%d,%d,%lld,%.6f,%.6f,%d\n", r.x, r.y,
                      static_cast<long long>(r.t), r.vx, r.vy, r.window);
        out << buf;
    }
    if (!out) throw IoError("failed writing flow results");
}

inline std::vector<TrueFlowResult> parse_flow(std::istream& in) {
    std::vector<TrueFlowResult> results;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view sv = detail::trim(line);
        if (detail::skippable(sv)) continue;
        const auto fields = detail::split_csv(sv);
        if (fields.size() != 6)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected x,y,t,vx,vy,window");
        TrueFlowResult r;
        r.x = detail::parse_int<int>(fields[0], line_no, "x");
        r.y = detail::parse_int<int>(fields[1], line_no, "y");
        r.t = detail::parse_int<std::int64_t>(fields[2], line_no, "t");
        r.vx = detail::parse_double(fields[3], line_no, "vx");
        r.vy = detail::parse_double(fields[4], line_no, "vy");
        r.window = detail::parse_int<int>(fields[5], line_no, "window");
        results.push_back(r);
    }
    return results;
}

// ---------------------------------------------------------------------------
// Dataset manifests.
// ---------------------------------------------------------------------------

enum class TruthKind { none, angle, segments, series };

/// One constant-motion interval of ground truth.
struct TruthSegment {
    std::int64_t t_begin_us = 0;
    std::int64_t t_end_us = 0;
    double direction_deg = 0.0;
    double speed_px_s = 0.0;
};

struct DatasetManifest {
    std::string name;
    SensorGeometry geometry;
    std::string event_path;
    TruthKind truth_kind = TruthKind::none;
    std::vector<TruthSegment> segments; // angle / segments kinds
    std::string truth_path;             // segments / series kinds
    std::int64_t duration_us = 0;
};

inline void validate(const DatasetManifest& m) {
    validate(m.geometry);
    if (m.duration_us <= 0) throw ConfigError("manifest duration must be positive");
    for (std::size_t i = 0; i < m.segments.size(); ++i) {
        const auto& s = m.segments[i];
        if (s.t_end_us <= s.t_begin_us)
            throw ConfigError("manifest truth segment " + std::to_string(i) + " is empty");
        if (i > 0 && s.t_begin_us < m.segments[i - 1].t_end_us)
            throw ConfigError("manifest truth segments overlap at index " + std::to_string(i));
    }
}

inline void write_manifest(const DatasetManifest& m, std::ostream& out) {
    out << "name=" << m.name << '\n';
    out << "width=" << m.geometry.width << '\n';
    out << "height=" << m.geometry.height << '\n';
    out << "events=" << m.event_path << '\n';
    switch (m.truth_kind) {
    case TruthKind::none:
        out << "truth_kind=none\n";
        break;
    case TruthKind::angle: {
        out << "truth_kind=angle\n";
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.9g", m.segments.empty() ? 0.0 : m.segments.front().direction_deg);
        out << "truth_angle_deg=" << buf << '\n';
        break;
    }
    case TruthKind::segments:
        out << "truth_kind=segments\n";
        out << "truth_path=" << m.truth_path << '\n';
        break;
    case TruthKind::series:
        out << "truth_kind=series\n";
        out << "truth_path=" << m.truth_path << '\n';
        break;
    }
    out << "duration_us=" << m.duration_us << '\n';
    if (!out) throw IoError("failed writing manifest");
}

inline DatasetManifest read_manifest(std::istream& in) {
    DatasetManifest m;
    std::string line;
    std::size_t line_no = 0;
    double truth_angle = 0.0;
    bool have_angle = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view sv = detail::trim(line);
        if (detail::skippable(sv)) continue;
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("manifest line " + std::to_string(line_no) + ": expected key=value");
        const std::string_view key = detail::trim(sv.substr(0, eq));
        const std::string_view val = detail::trim(sv.substr(eq + 1));
        if (key == "name") m.name = std::string(val);
        else if (key == "width") m.geometry.width = detail::parse_int<int>(val, line_no, "width");
        else if (key == "height") m.geometry.height = detail::parse_int<int>(val, line_no, "height");
        else if (key == "events") m.event_path = std::string(val);
        else if (key == "truth_path") m.truth_path = std::string(val);
        else if (key == "duration_us") m.duration_us = detail::parse_int<std::int64_t>(val, line_no, "duration_us");
        else if (key == "truth_angle_deg") { truth_angle = detail::parse_double(val, line_no, "truth_angle_deg"); have_angle = true; }
        else if (key == "truth_kind") {
            if (val == "none") m.truth_kind = TruthKind::none;
            else if (val == "angle") m.truth_kind = TruthKind::angle;
            else if (val == "segments") m.truth_kind = TruthKind::segments;
            else if (val == "series") m.truth_kind = TruthKind::series;
            else throw ParseError("manifest line " + std::to_string(line_no) + ": unknown truth_kind '" + std::string(val) + "'");
        } else {
            throw ParseError("manifest line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
        }
    }
    if (m.truth_kind == TruthKind::angle) {
        if (!have_angle) throw ParseError("manifest: truth_kind=angle requires truth_angle_deg");
        m.segments.push_back(TruthSegment{0, m.duration_us, truth_angle, 0.0});
    }
    validate(m);
    return m;
}

/// Truth-segment file: `t_begin_us,t_end_us,direction_deg,speed_px_s` lines.
inline void write_truth_segments(const std::vector<TruthSegment>& segs, std::ostream& out) {
    char buf[160];
    for (const auto& s : segs) {
        std::snprintf(buf, sizeof buf, "%lld,%lld,%.9g,%.9g\n", static_cast<long long>(s.t_begin_us),
                      static_cast<long long>(s.t_end_us), s.direction_deg, s.speed_px_s);
        out << buf;
    }
    if (!out) throw IoError("failed writing truth segments");
}

inline std::vector<TruthSegment> read_truth_segments(std::istream& in) {
    std::vector<TruthSegment> segs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view sv = detail::trim(line);
        if (detail::skippable(sv)) continue;
        const auto fields = detail::split_csv(sv);
        if (fields.size() != 4)
            throw ParseError("truth line " + std::to_string(line_no) +
                             ": expected t_begin_us,t_end_us,direction_deg,speed_px_s");
        TruthSegment s;
        s.t_begin_us = detail::parse_int<std::int64_t>(fields[0], line_no, "t_begin_us");
        s.t_end_us = detail::parse_int<std::int64_t>(fields[1], line_no, "t_end_us");
        s.direction_deg = detail::parse_double(fields[2], line_no, "direction_deg");
        s.speed_px_s = detail::parse_double(fields[3], line_no, "speed_px_s");
        segs.push_back(s);
    }
    return segs;
}

// ---------------------------------------------------------------------------
// Synthetic Bar-Square scene generator.
//
// The scene holds a square, a horizontal bar and a nominally vertical bar,
// all translating rigidly along the configured direction. Events are placed
// at the exact time the shape boundary crosses each pixel center: a leading
// edge emits p=1, a trailing edge p=0. Edges parallel to the motion never
// cross pixels and therefore emit nothing, which is why the vertical bar is
// tilted by a few degrees — its long edges then sweep slowly sideways and
// produce the small, edge-normal flow estimates that multi-scale pooling
// has to correct.
// ---------------------------------------------------------------------------

/// One constant-velocity interval of scene motion.
struct MotionPhase {
    double speed_px_s = 0.0;
    double direction_deg = 0.0;
    std::int64_t duration_us = 0;
};

struct BarSquareConfig {
    SensorGeometry geometry{304, 240};
    std::vector<MotionPhase> phases;
    double edge_event_rate = 1.0;      // events per pixel crossing
    double bar_tilt_deg = 10.0;        // tilt of the nominally vertical bar
    std::int64_t timestamp_noise_us = 0;
    std::uint64_t seed = 1;
    bool include_square = true;
    bool include_h_bar = true;
    bool include_v_bar = true;
    std::string name = "bar-square";
};

struct SyntheticDataset {
    std::vector<RawEvent> events;
    DatasetManifest manifest;
};

namespace detail {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

// Half-plane n.q <= c with unit outward normal; the polygon interior is the
// intersection of its edge half-planes.
struct HalfPlane {
    Vec2 n;
    double c = 0.0;
};

struct Polygon {
    std::vector<Vec2> verts; // counter-clockwise
    std::vector<HalfPlane> planes;
};

inline Polygon make_polygon(std::vector<Vec2> ccw) {
    Polygon poly;
    poly.verts = std::move(ccw);
    const std::size_t n = poly.verts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly.verts[i];
        const Vec2 b = poly.verts[(i + 1) % n];
        const Vec2 d = b - a;
        const double len = std::hypot(d.x, d.y);
        const Vec2 normal{d.y / len, -d.x / len}; // outward for CCW order
        poly.planes.push_back({normal, dot(normal, a)});
    }
    return poly;
}

inline Polygon make_rect(Vec2 center, double width, double height, double rot_deg) {
    const double r = rot_deg * std::acos(-1.0) / 180.0;
    const double cs = std::cos(r), sn = std::sin(r);
    const double hw = width / 2.0, hh = height / 2.0;
    const Vec2 corners[4] = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
    std::vector<Vec2> verts;
    verts.reserve(4);
    for (const Vec2& c : corners)
        verts.push_back({center.x + cs * c.x - sn * c.y, center.y + sn * c.x + cs * c.y});
    return make_polygon(std::move(verts));
}

} // namespace detail

inline SyntheticDataset generate_bar_square(const BarSquareConfig& config) {
    validate(config.geometry);
    if (config.phases.empty()) throw ConfigError("generator needs at least one motion phase");
    for (const auto& ph : config.phases) {
        if (!(ph.speed_px_s > 0.0)) throw ConfigError("generator speed must be positive");
        if (ph.duration_us <= 0) throw ConfigError("generator phase duration must be positive");
    }
    if (!(config.edge_event_rate > 0.0)) throw ConfigError("edge_event_rate must be positive");
    if (!config.include_square && !config.include_h_bar && !config.include_v_bar)
        throw ConfigError("generator scene has no shapes enabled");

    using detail::Vec2;
    const double W = config.geometry.width;
    const double H = config.geometry.height;
    const double m = std::min(W, H);

    std::vector<detail::Polygon> shapes;
    if (config.include_square)
        shapes.push_back(detail::make_rect({0.18 * W, 0.38 * H}, 0.20 * m, 0.20 * m, 0.0));
    if (config.include_v_bar)
        shapes.push_back(detail::make_rect({0.33 * W, 0.38 * H}, 0.06 * W, 0.28 * H,
                                           config.bar_tilt_deg));
    if (config.include_h_bar)
        shapes.push_back(detail::make_rect({0.62 * W, 0.38 * H}, 0.45 * W, 0.06 * H, 0.0));

    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<int> jitter(-1, 1);
    std::uniform_int_distribution<std::int64_t> noise(-config.timestamp_noise_us,
                                                      config.timestamp_noise_us);
    const int per_crossing = std::max(1, static_cast<int>(std::llround(config.edge_event_rate)));

    std::int64_t total_duration = 0;
    for (const auto& ph : config.phases) total_duration += ph.duration_us;

    std::vector<RawEvent> events;
    std::vector<TruthSegment> segments;

    const double deg = std::acos(-1.0) / 180.0;
    Vec2 offset{0.0, 0.0}; // cumulative shape displacement across phases
    std::int64_t phase_start_us = 0;

    auto emit = [&](int x, int y, double t_seconds, int polarity) {
        std::int64_t t_us = static_cast<std::int64_t>(std::llround(t_seconds * 1e6));
        t_us += jitter(rng);
        if (config.timestamp_noise_us > 0) t_us += noise(rng);
        if (t_us < 0) t_us = 0;
        if (t_us > total_duration) t_us = total_duration;
        events.push_back(RawEvent{x, y, t_us, polarity});
    };

    for (const auto& phase : config.phases) {
        const Vec2 velocity{phase.speed_px_s * std::cos(phase.direction_deg * deg),
                            phase.speed_px_s * std::sin(phase.direction_deg * deg)};
        const double phase_len = phase.duration_us * 1e-6;
        const double t0 = phase_start_us * 1e-6;

        segments.push_back(TruthSegment{phase_start_us, phase_start_us + phase.duration_us,
                                        phase.direction_deg, phase.speed_px_s});

        for (const auto& shape : shapes) {
            // Bounding box of the shape over the whole phase, clipped to the frame.
            double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
            for (const Vec2& v : shape.verts) {
                for (double f : {0.0, phase_len}) {
                    const Vec2 q = v + offset + f * velocity;
                    min_x = std::min(min_x, q.x);
                    max_x = std::max(max_x, q.x);
                    min_y = std::min(min_y, q.y);
                    max_y = std::max(max_y, q.y);
                }
            }
            const int x_lo = std::max(0, static_cast<int>(std::floor(min_x)) - 1);
            const int x_hi = std::min(config.geometry.width - 1, static_cast<int>(std::ceil(max_x)) + 1);
            const int y_lo = std::max(0, static_cast<int>(std::floor(min_y)) - 1);
            const int y_hi = std::min(config.geometry.height - 1, static_cast<int>(std::ceil(max_y)) + 1);

            for (int y = y_lo; y <= y_hi; ++y) {
                for (int x = x_lo; x <= x_hi; ++x) {
                    // Inside(t) is an intersection of linear constraints in t:
                    // g_i <= s_i * (t - t0) for each edge i.
                    double lower = -1e300, upper = 1e300;
                    double lower_rate = 0.0, upper_rate = 0.0;
                    bool never = false;
                    for (const auto& hp : shape.planes) {
                        const double g = hp.n.x * (x - offset.x) + hp.n.y * (y - offset.y) - hp.c;
                        const double s = dot(hp.n, velocity);
                        if (s == 0.0) {
                            if (g > 0.0) { never = true; break; }
                        } else if (s > 0.0) {
                            const double bound = g / s;
                            if (bound > lower) { lower = bound; lower_rate = s; }
                        } else {
                            const double bound = g / s;
                            if (bound < upper) { upper = bound; upper_rate = -s; }
                        }
                    }
                    if (never || lower >= upper) continue;

                    if (lower > 0.0 && lower < phase_len) {
                        const double dwell = 1.0 / lower_rate; // seconds per pixel of normal travel
                        const double room = std::min(upper, phase_len) - lower;
                        for (int j = 0; j < per_crossing; ++j) {
                            const double off = std::min(j * dwell / per_crossing, 0.9 * room);
                            emit(x, y, t0 + lower + off, 1);
                        }
                    }
                    if (upper > 0.0 && upper < phase_len) {
                        const double dwell = 1.0 / upper_rate;
                        const double room = phase_len - upper;
                        for (int j = 0; j < per_crossing; ++j) {
                            const double off = std::min(j * dwell / per_crossing, room);
                            emit(x, y, t0 + upper + off, 0);
                        }
                    }
                }
            }
        }

        offset = offset + phase_len * velocity;
        phase_start_us += phase.duration_us;
    }

    std::sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        return a.p < b.p;
    });

    SyntheticDataset ds;
    ds.events = std::move(events);
    ds.manifest.name = config.name;
    ds.manifest.geometry = config.geometry;
    ds.manifest.duration_us = total_duration;
    ds.manifest.segments = std::move(segments);
    ds.manifest.truth_kind = ds.manifest.segments.size() == 1 ? TruthKind::angle : TruthKind::segments;
    return ds;
}

/// Single-phase convenience form.
inline SyntheticDataset generate_bar_square(const SensorGeometry& geometry, double speed_px_s,
                                            double direction_deg, std::int64_t duration_us,
                                            double edge_event_rate = 1.0, std::uint64_t seed = 1) {
    BarSquareConfig cfg;
    cfg.geometry = geometry;
    cfg.phases.push_back(MotionPhase{speed_px_s, direction_deg, duration_us});
    cfg.edge_event_rate = edge_event_rate;
    cfg.seed = seed;
    return generate_bar_square(cfg);
}

} // namespace arms
