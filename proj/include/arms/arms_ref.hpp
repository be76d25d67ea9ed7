#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "arms/errors.hpp"
#include "arms/types.hpp"

namespace arms {

/// Per-pixel event frame holding the most recent valid local-flow event at
/// each pixel. This is the data structure the original frame-scanning
/// algorithm pools over; it forgets everything but the latest event per cell.
class FlowFrame {
public:
    struct Cell {
        std::int64_t t = 0;
        double vx = 0.0;
        double vy = 0.0;
        double mag = 0.0;
        bool valid = false;
    };

    explicit FlowFrame(const SensorGeometry& geometry) : geometry_(geometry) {
        validate(geometry);
        cells_.assign(static_cast<std::size_t>(geometry.width) * geometry.height, Cell{});
    }

    const SensorGeometry& geometry() const { return geometry_; }

    const Cell& at(int x, int y) const {
        return cells_[static_cast<std::size_t>(y) * geometry_.width + x];
    }

    /// Stores the event at its pixel; a cell's timestamp never decreases.
    void write(const LocalFlowEvent& e) {
        if (!geometry_.contains(e.x, e.y))
            throw ArgumentError("flow event out of bounds at (" + std::to_string(e.x) + "," +
                                std::to_string(e.y) + ")");
        Cell& cell = cells_[static_cast<std::size_t>(e.y) * geometry_.width + e.x];
        if (cell.valid && e.t < cell.t) return;
        cell = Cell{e.t, e.vx, e.vy, e.mag, true};
    }

private:
    SensorGeometry geometry_;
    std::vector<Cell> cells_;
};

/// Closed-form iteration count of the frame-scanning algorithm,
/// n = (1/6) (2 W_m / eta)^2 eta (eta+1) (2 eta+1), which equals
/// sum over windows of (2 w_i)^2 with w_i = i * (W_m / eta).
inline std::uint64_t arms_iteration_count(const ArmsParams& params) {
    validate(params);
    const std::uint64_t side = 2ull * params.w_max / params.num_windows;
    const std::uint64_t eta = params.num_windows;
    return side * side * eta * (eta + 1) * (2 * eta + 1) / 6;
}

/// Frame-scanning multi-scale pooling for one event. Every window i scans a
/// square of exactly (2 w_i)^2 cells around the event, counting each scanned
/// position as one loop iteration whether or not it is inside the frame, so
/// the instrumented count matches the closed form regardless of where the
/// event sits. Cells accumulate when they hold a valid flow within tau and
/// lie strictly inside the window's max-component-distance bound — the same
/// membership rule the ring-buffer engine's window tags encode.
///
/// The event itself must already be written into the frame.
inline std::pair<TrueFlowResult, IterationStats> arms_true_flow(const FlowFrame& frame,
                                                                const LocalFlowEvent& e,
                                                                const ArmsParams& params) {
    validate(params);
    const int eta = params.num_windows;
    const int step = params.w_max / eta;
    const auto& geom = frame.geometry();

    std::vector<double> sum_vx(eta, 0.0), sum_vy(eta, 0.0), sum_mag(eta, 0.0);
    std::vector<std::uint64_t> counts(eta, 0);
    IterationStats stats;

    for (int win = 0; win < eta; ++win) {
        const int half = (win + 1) * step;
        for (int dy = -half; dy < half; ++dy) {
            const int y = e.y + dy;
            const bool y_in = y >= 0 && y < geom.height;
            for (int dx = -half; dx < half; ++dx) {
                ++stats.loop_iterations;
                if (!y_in) continue;
                const int x = e.x + dx;
                if (x < 0 || x >= geom.width) continue;
                if (std::max(std::abs(dx), std::abs(dy)) >= half) continue;
                const FlowFrame::Cell& cell = frame.at(x, y);
                if (!cell.valid) continue;
                if (std::abs(cell.t - e.t) > params.tau_us) continue;
                ++stats.events_considered;
                sum_vx[win] += cell.vx;
                sum_vy[win] += cell.vy;
                sum_mag[win] += cell.mag;
                ++counts[win];
            }
        }
    }

    int best = 0;
    double best_mean = -1.0;
    for (int win = 0; win < eta; ++win) {
        if (counts[win] == 0) continue; // cannot happen: the center cell is in every window
        const double mean = sum_mag[win] / static_cast<double>(counts[win]);
        if (mean > best_mean) {
            best_mean = mean;
            best = win;
        }
    }

    TrueFlowResult result;
    result.x = e.x;
    result.y = e.y;
    result.t = e.t;
    result.vx = sum_vx[best] / static_cast<double>(counts[best]);
    result.vy = sum_vy[best] / static_cast<double>(counts[best]);
    result.window = best;
    return {result, stats};
}

} // namespace arms
