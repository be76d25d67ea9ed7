#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "arms/errors.hpp"
#include "arms/types.hpp"

namespace arms {

/// Per-pixel map of the most recent event timestamp, one plane per polarity.
/// This is the substrate the plane-fitting local flow reads from.
class SurfaceOfActiveEvents {
public:
    static constexpr std::int64_t kUnset = std::numeric_limits<std::int64_t>::min();

    explicit SurfaceOfActiveEvents(const SensorGeometry& geometry) : geometry_(geometry) {
        validate(geometry);
        planes_[0].assign(static_cast<std::size_t>(geometry.width) * geometry.height, kUnset);
        planes_[1] = planes_[0];
    }

    const SensorGeometry& geometry() const { return geometry_; }

    std::int64_t at(int polarity, int x, int y) const {
        return planes_[polarity][static_cast<std::size_t>(y) * geometry_.width + x];
    }

    /// Records the event time at its pixel. Entries only ever increase.
    void update(const RawEvent& e) {
        if (!geometry_.contains(e.x, e.y))
            throw ArgumentError("SAE update out of bounds at (" + std::to_string(e.x) + "," +
                                std::to_string(e.y) + ")");
        auto& cell = planes_[e.p][static_cast<std::size_t>(e.y) * geometry_.width + e.x];
        if (e.t > cell) cell = e.t;
    }

private:
    SensorGeometry geometry_;
    std::array<std::vector<std::int64_t>, 2> planes_;
};

inline void update_sae(SurfaceOfActiveEvents& sae, const RawEvent& e) { sae.update(e); }

struct LocalFlowParams {
    int neighborhood_radius = 3;        // (2r+1)x(2r+1) fit support
    std::int64_t fit_window_us = 20000; // how far back to trust SAE entries
    int min_support = 8;
    std::int64_t max_residual_us = 2000;
};

inline void validate(const LocalFlowParams& p) {
    if (p.neighborhood_radius < 1) throw ConfigError("neighborhood_radius must be >= 1");
    if (p.fit_window_us <= 0) throw ConfigError("fit_window_us must be positive");
    if (p.min_support < 3) throw ConfigError("min_support must be >= 3 for a plane fit");
    if (p.max_residual_us <= 0) throw ConfigError("max_residual_us must be positive");
}

/// Fits t = a*x + b*y + c over the recent same-polarity SAE neighborhood of
/// `e` and inverts the time gradient into a flow vector. Returns nothing when
/// the support is too thin, the fit is degenerate, or the residual is too
/// large — degenerate fits are expected, not errors.
///
/// The caller must have applied update_sae(e) first, so the center cell
/// always participates.
inline std::optional<LocalFlowEvent> compute_local_flow(const SurfaceOfActiveEvents& sae,
                                                        const RawEvent& e,
                                                        const LocalFlowParams& params = {}) {
    validate(params);
    const auto& geom = sae.geometry();
    if (!geom.contains(e.x, e.y))
        throw ArgumentError("event out of bounds at (" + std::to_string(e.x) + "," +
                            std::to_string(e.y) + ")");

    const int r = params.neighborhood_radius;
    // Neighborhood samples, coordinates and times centered on the event.
    std::vector<std::array<double, 3>> pts;
    pts.reserve(static_cast<std::size_t>(2 * r + 1) * (2 * r + 1));
    for (int dy = -r; dy <= r; ++dy) {
        const int y = e.y + dy;
        if (y < 0 || y >= geom.height) continue;
        for (int dx = -r; dx <= r; ++dx) {
            const int x = e.x + dx;
            if (x < 0 || x >= geom.width) continue;
            const std::int64_t t = sae.at(e.p, x, y);
            if (t == SurfaceOfActiveEvents::kUnset) continue;
            if (t > e.t || e.t - t > params.fit_window_us) continue;
            pts.push_back({static_cast<double>(dx), static_cast<double>(dy),
                           static_cast<double>(t - e.t)});
        }
    }
    if (static_cast<int>(pts.size()) < params.min_support) return std::nullopt;

    double sxx = 0, sxy = 0, sx = 0, syy = 0, sy = 0, sxt = 0, syt = 0, st = 0;
    const double n = static_cast<double>(pts.size());
    for (const auto& p : pts) {
        sxx += p[0] * p[0];
        sxy += p[0] * p[1];
        sx += p[0];
        syy += p[1] * p[1];
        sy += p[1];
        sxt += p[0] * p[2];
        syt += p[1] * p[2];
        st += p[2];
    }

    // 3x3 normal equations solved by Cramer's rule.
    const double det = sxx * (syy * n - sy * sy) - sxy * (sxy * n - sy * sx) +
                       sx * (sxy * sy - syy * sx);
    if (std::abs(det) < 1e-12) return std::nullopt;

    const double a = (sxt * (syy * n - sy * sy) - sxy * (syt * n - sy * st) +
                      sx * (syt * sy - syy * st)) / det;
    const double b = (sxx * (syt * n - sy * st) - sxt * (sxy * n - sy * sx) +
                      sx * (sxy * st - syt * sx)) / det;
    const double c = (sxx * (syy * st - syt * sy) - sxy * (sxy * st - syt * sx) +
                      sxt * (sxy * sy - syy * sx)) / det;

    double abs_residual = 0.0;
    for (const auto& p : pts) abs_residual += std::abs(p[2] - (a * p[0] + b * p[1] + c));
    if (abs_residual / n > static_cast<double>(params.max_residual_us)) return std::nullopt;

    const double grad2 = a * a + b * b;
    if (grad2 == 0.0) return std::nullopt;

    // Gradient is in us/px; the inverse-gradient flow lands in px/us.
    const double vx = a / grad2 * 1e6;
    const double vy = b / grad2 * 1e6;
    LocalFlowEvent out = make_local_flow_event(e.x, e.y, e.t, vx, vy);
    if (!(out.mag > 0.0)) return std::nullopt;
    return out;
}

/// Runs the SAE front end over a raw event stream, producing the local-flow
/// stream the true-flow engines consume.
inline std::vector<LocalFlowEvent> local_flow_stream(const std::vector<RawEvent>& events,
                                                     const SensorGeometry& geometry,
                                                     const LocalFlowParams& params = {}) {
    SurfaceOfActiveEvents sae(geometry);
    std::vector<LocalFlowEvent> out;
    out.reserve(events.size() / 2);
    for (const auto& e : events) {
        sae.update(e);
        if (auto f = compute_local_flow(sae, e, params)) out.push_back(*f);
    }
    return out;
}

} // namespace arms
