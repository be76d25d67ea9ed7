#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "arms/errors.hpp"

namespace arms {

/// One sensor event in address-event representation: pixel coordinates,
/// a microsecond timestamp and an on/off polarity.
struct RawEvent {
    int x = 0;
    int y = 0;
    std::int64_t t = 0; // microseconds
    int p = 0;          // polarity, 0 or 1
};

struct SensorGeometry {
    int width = 0;
    int height = 0;

    bool contains(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
};

inline void validate(const SensorGeometry& g) {
    if (g.width < 1 || g.height < 1)
        throw ConfigError("sensor geometry must be at least 1x1, got " +
                          std::to_string(g.width) + "x" + std::to_string(g.height));
}

/// An event annotated with its local (normal) flow. This is the unit of
/// input to every true-flow engine. Flow components are in pixels per
/// second; mag is always sqrt(vx^2 + vy^2).
struct LocalFlowEvent {
    int x = 0;
    int y = 0;
    std::int64_t t = 0; // microseconds
    double vx = 0.0;    // px/s
    double vy = 0.0;    // px/s
    double mag = 0.0;   // px/s
};

/// Builds a LocalFlowEvent with the magnitude derived from the components.
inline LocalFlowEvent make_local_flow_event(int x, int y, std::int64_t t,
                                            double vx, double vy) {
    return LocalFlowEvent{x, y, t, vx, vy, std::hypot(vx, vy)};
}

/// Checks the constructed-event invariants: mag consistent with (vx, vy)
/// to 1e-6 relative and strictly positive.
inline bool local_flow_valid(const LocalFlowEvent& e) {
    if (!(e.mag > 0.0)) return false;
    const double m = std::hypot(e.vx, e.vy);
    return std::abs(e.mag - m) <= 1e-6 * std::max(m, 1e-300);
}

/// Corrected flow for one event plus the index of the winning window.
struct TrueFlowResult {
    int x = 0;
    int y = 0;
    std::int64_t t = 0;
    double vx = 0.0;
    double vy = 0.0;
    int window = 0; // in [0, num_windows)
};

/// Per-event instrumentation of the pooling work.
struct IterationStats {
    std::uint64_t loop_iterations = 0;   // innermost pooling iterations
    std::uint64_t events_considered = 0; // cells/slots passing the tau filter
};

/// The full algorithm configuration tuple. `w_max` is the maximum window
/// half-size W_m, `num_windows` is eta, `tau_us` the temporal inclusion
/// window, `buffer_len` the recent-flow buffer capacity N and `batch` the
/// accelerator batch width P (used by the hardware model only).
struct ArmsParams {
    int w_max = 320;
    int num_windows = 4;
    std::int64_t tau_us = 5000;
    int buffer_len = 1000;
    int batch = 1;
};

inline void validate(const ArmsParams& p) {
    if (p.w_max < 1)
        throw ConfigError("w_max must be >= 1, got " + std::to_string(p.w_max));
    if (p.num_windows < 1)
        throw ConfigError("num_windows must be >= 1, got " + std::to_string(p.num_windows));
    if (p.w_max % p.num_windows != 0)
        throw ConfigError("w_max (" + std::to_string(p.w_max) +
                          ") must be divisible by num_windows (" +
                          std::to_string(p.num_windows) + ")");
    if (p.tau_us <= 0)
        throw ConfigError("tau_us must be positive, got " + std::to_string(p.tau_us));
    if (p.buffer_len < 1)
        throw ConfigError("buffer_len must be >= 1, got " + std::to_string(p.buffer_len));
    if (p.batch < 1)
        throw ConfigError("batch must be >= 1, got " + std::to_string(p.batch));
}

/// Window bin edges: edges[w] = w * (W_m / eta), for w in [0, eta].
/// Strictly increasing, edges.front() == 0, edges.back() == W_m.
struct WindowEdges {
    std::vector<int> edges;

    int num_windows() const { return static_cast<int>(edges.size()) - 1; }
};

inline WindowEdges init_window_edges(const ArmsParams& params) {
    validate(params);
    const int step = params.w_max / params.num_windows;
    WindowEdges we;
    we.edges.resize(params.num_windows + 1);
    for (int w = 0; w <= params.num_windows; ++w) we.edges[w] = w * step;
    return we;
}

/// Maps a maximum component distance onto its window tag: the unique j with
/// d_max in [edges[j], edges[j+1]), or eta when d_max >= edges[eta]. Tag j
/// means the event belongs to windows j, j+1, ..., eta-1; tag eta means it
/// belongs to none.
inline int window_tag(int d_max, const WindowEdges& we) {
    const int eta = we.num_windows();
    for (int j = 0; j < eta; ++j) {
        if (d_max >= we.edges[j] && d_max < we.edges[j + 1]) return j;
    }
    return eta;
}

inline int max_component_distance(int ax, int ay, int bx, int by) {
    return std::max(std::abs(ax - bx), std::abs(ay - by));
}

/// Convenience overload over two events.
template <typename EventA, typename EventB>
int window_tag(const EventA& center, const EventB& other, const WindowEdges& we) {
    return window_tag(max_component_distance(center.x, center.y, other.x, other.y), we);
}

} // namespace arms
