#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "arms/errors.hpp"
#include "arms/types.hpp"

namespace arms {

/// Fixed-capacity ring of the most recent N events, with per-slot validity.
/// Validity flags stand in for zero-initialized slots: a zeroed slot with
/// t = 0 would pass the tau filter early in a stream and bias averages
/// toward zero flow.
template <typename Event>
class RecentFlowBuffer {
public:
    explicit RecentFlowBuffer(int capacity) : slots_(capacity), valid_(capacity, 0) {
        if (capacity < 1) throw ConfigError("ring buffer capacity must be >= 1");
    }

    int capacity() const { return static_cast<int>(slots_.size()); }
    int next_idx() const { return next_idx_; }
    bool valid(int i) const { return valid_[i] != 0; }
    const Event& slot(int i) const { return slots_[i]; }

    void insert(const Event& e) {
        slots_[next_idx_] = e;
        valid_[next_idx_] = 1;
        next_idx_ = (next_idx_ + 1) % capacity();
    }

private:
    std::vector<Event> slots_;
    std::vector<char> valid_;
    int next_idx_ = 0;
};

template <typename Event>
void rfb_insert(RecentFlowBuffer<Event>& rfb, const Event& e) {
    rfb.insert(e);
}

/// Worst-case pooling iterations per event: one arbitration pass and one
/// accumulation pass of eta steps over each of the N slots, n = 2 N eta.
inline std::uint64_t farms_iteration_count(const ArmsParams& params) {
    validate(params);
    return 2ull * params.buffer_len * params.num_windows;
}

/// Ring-buffer multi-scale pooling for one event: inserts the event, then
/// streams every slot through window arbitration and per-window accumulation.
/// Both eta-step passes run for every slot visit regardless of the tau
/// outcome, mirroring the hardware dataflow, so the instrumented count is
/// exactly 2 N eta.
inline std::pair<TrueFlowResult, IterationStats> farms_process_event(
    RecentFlowBuffer<LocalFlowEvent>& rfb, const LocalFlowEvent& e, const ArmsParams& params,
    const WindowEdges& edges) {
    const int eta = params.num_windows;
    const int n = rfb.capacity();

    rfb.insert(e);

    std::vector<double> sum_vx(eta, 0.0), sum_vy(eta, 0.0), sum_mag(eta, 0.0);
    std::vector<std::uint64_t> counts(eta, 0);
    IterationStats stats;

    for (int i = 0; i < n; ++i) {
        const LocalFlowEvent& s = rfb.slot(i);
        const int usable =
            static_cast<int>(rfb.valid(i)) & static_cast<int>(std::abs(s.t - e.t) <= params.tau_us);

        // Window arbitration: the tag is the number of upper edges at or
        // below d_max, scanned branch-free the way the unrolled tag lookup
        // is in hardware.
        const int d_max = max_component_distance(e.x, e.y, s.x, s.y);
        int tag = 0;
        for (int j = 0; j < eta; ++j) {
            ++stats.loop_iterations;
            tag += static_cast<int>(d_max >= edges.edges[j + 1]);
        }

        // Window averaging: every window does its multiply-add each step and
        // the tag gates the operand, like the streaming averager. Adding a
        // signed zero never changes a sum, so results are bit-identical to a
        // branched accumulation while the per-slot cost stays independent of
        // where the tags land (and therefore of W_m).
        for (int k = 0; k < eta; ++k) {
            ++stats.loop_iterations;
            const int in_window = usable & static_cast<int>(tag <= k);
            const double gate = static_cast<double>(in_window);
            sum_vx[k] += gate * s.vx;
            sum_vy[k] += gate * s.vy;
            sum_mag[k] += gate * s.mag;
            counts[k] += static_cast<std::uint64_t>(in_window);
        }
        stats.events_considered += static_cast<std::uint64_t>(usable);
    }

    int best = 0;
    double best_mean = -1.0;
    for (int k = 0; k < eta; ++k) {
        if (counts[k] == 0) continue; // cannot happen: the event itself has tag 0
        const double mean = sum_mag[k] / static_cast<double>(counts[k]);
        if (mean > best_mean) {
            best_mean = mean;
            best = k;
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

/// Stream-level convenience wrapper owning the ring buffer.
class FarmsEngine {
public:
    explicit FarmsEngine(const ArmsParams& params)
        : params_(params), edges_(init_window_edges(params)), rfb_(params.buffer_len) {}

    const ArmsParams& params() const { return params_; }
    const WindowEdges& edges() const { return edges_; }
    RecentFlowBuffer<LocalFlowEvent>& buffer() { return rfb_; }

    TrueFlowResult process(const LocalFlowEvent& e) {
        auto [result, stats] = farms_process_event(rfb_, e, params_, edges_);
        last_stats_ = stats;
        total_iterations_ += stats.loop_iterations;
        return result;
    }

    const IterationStats& last_stats() const { return last_stats_; }
    std::uint64_t total_iterations() const { return total_iterations_; }

private:
    ArmsParams params_;
    WindowEdges edges_;
    RecentFlowBuffer<LocalFlowEvent> rfb_;
    IterationStats last_stats_;
    std::uint64_t total_iterations_ = 0;
};

} // namespace arms
