#pragma once

#include <cfenv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "arms/errors.hpp"
#include "arms/farms.hpp"
#include "arms/fixed_point.hpp"
#include "arms/types.hpp"

namespace arms {

/// A local-flow event as the accelerator sees it: flow components rounded to
/// 16-bit integers. Coordinates and the microsecond timestamp pass through.
struct QuantizedFlowEvent {
    int x = 0;
    int y = 0;
    std::int64_t t = 0;
    std::int16_t vx_q = 0;
    std::int16_t vy_q = 0;
    std::int16_t mag_q = 0;
};

namespace detail {

inline std::int16_t quantize16(double v, std::uint64_t* saturations) {
    // nearbyint under the default rounding mode is round-half-to-even.
    const double rounded = std::nearbyint(v);
    if (rounded > 32767.0) {
        if (saturations) ++*saturations;
        return 32767;
    }
    if (rounded < -32768.0) {
        if (saturations) ++*saturations;
        return -32768;
    }
    return static_cast<std::int16_t>(rounded);
}

} // namespace detail

/// Rounds each flow field to the nearest 16-bit integer, saturating silently;
/// every saturated field bumps the optional counter.
inline QuantizedFlowEvent quantize_flow_event(const LocalFlowEvent& e,
                                              std::uint64_t* saturations = nullptr) {
    QuantizedFlowEvent q;
    q.x = e.x;
    q.y = e.y;
    q.t = e.t;
    q.vx_q = detail::quantize16(e.vx, saturations);
    q.vy_q = detail::quantize16(e.vy, saturations);
    q.mag_q = detail::quantize16(e.mag, saturations);
    return q;
}

/// Batch of up to P events awaiting one accelerator call.
class EventAccumulationBuffer {
public:
    explicit EventAccumulationBuffer(int capacity) : capacity_(capacity) {
        if (capacity < 1) throw ConfigError("EAB capacity must be >= 1");
        entries_.reserve(capacity);
    }

    int capacity() const { return capacity_; }
    bool full() const { return static_cast<int>(entries_.size()) == capacity_; }
    bool empty() const { return entries_.empty(); }
    const std::vector<QuantizedFlowEvent>& entries() const { return entries_; }

    void push(const QuantizedFlowEvent& e) {
        if (full()) throw ArgumentError("EAB overfilled beyond its batch width");
        entries_.push_back(e);
    }

    void clear() { entries_.clear(); }

private:
    int capacity_;
    std::vector<QuantizedFlowEvent> entries_;
};

namespace detail {

inline void accumulate_checked(std::int64_t& sum, std::int64_t term, int window,
                               const char* which) {
    sum += term;
    if (sum > std::numeric_limits<std::int32_t>::max() ||
        sum < std::numeric_limits<std::int32_t>::min())
        throw AccumulatorOverflowError(std::string("32-bit ") + which +
                                       " accumulator overflow in window " +
                                       std::to_string(window) +
                                       "; reduce the buffer length or widen the model");
}

inline TrueFlowResult harms_process_one(const RecentFlowBuffer<QuantizedFlowEvent>& rfb,
                                        const QuantizedFlowEvent& e, const ArmsParams& params,
                                        const WindowEdges& edges) {
    const int eta = params.num_windows;
    std::vector<std::int64_t> sum_vx(eta, 0), sum_vy(eta, 0), sum_mag(eta, 0);
    std::vector<std::int64_t> counts(eta, 0);

    const int n = rfb.capacity();
    for (int i = 0; i < n; ++i) {
        if (!rfb.valid(i)) continue;
        const QuantizedFlowEvent& s = rfb.slot(i);
        if (std::abs(s.t - e.t) > params.tau_us) continue;
        const int tag = window_tag(max_component_distance(e.x, e.y, s.x, s.y), edges);
        for (int k = tag; k < eta; ++k) {
            accumulate_checked(sum_vx[k], s.vx_q, k, "vx");
            accumulate_checked(sum_vy[k], s.vy_q, k, "vy");
            accumulate_checked(sum_mag[k], s.mag_q, k, "mag");
            ++counts[k];
        }
    }

    int best = 0;
    FixedQ24_8 best_mean = FixedQ24_8::from_raw(std::numeric_limits<std::int32_t>::min());
    for (int k = 0; k < eta; ++k) {
        if (counts[k] == 0) continue; // the event itself is always in window 0
        const FixedQ24_8 mean = FixedQ24_8::from_ratio(sum_mag[k], counts[k]);
        if (best_mean < mean) {
            best_mean = mean;
            best = k;
        }
    }

    TrueFlowResult r;
    r.x = e.x;
    r.y = e.y;
    r.t = e.t;
    r.vx = FixedQ24_8::from_ratio(sum_vx[best], counts[best]).to_real();
    r.vy = FixedQ24_8::from_ratio(sum_vy[best], counts[best]).to_real();
    r.window = best;
    return r;
}

} // namespace detail

/// Processes one accumulated batch. All batch events enter the ring buffer
/// first; each is then pooled against that identical snapshot, so members may
/// see up to P-1 future events. Results come back in batch order whatever the
/// worker count.
inline std::vector<TrueFlowResult> harms_process_batch(RecentFlowBuffer<QuantizedFlowEvent>& rfb,
                                                       EventAccumulationBuffer& eab,
                                                       const ArmsParams& params,
                                                       const WindowEdges& edges,
                                                       int workers = 1) {
    if (eab.empty()) return {};
    if (workers < 1) throw ConfigError("worker count must be >= 1");
    const auto& batch = eab.entries();
    for (const auto& e : batch) rfb.insert(e);

    std::vector<TrueFlowResult> results(batch.size());
    if (workers == 1 || batch.size() == 1) {
        for (std::size_t i = 0; i < batch.size(); ++i)
            results[i] = detail::harms_process_one(rfb, batch[i], params, edges);
    } else {
        const int nthreads = std::min<int>(workers, static_cast<int>(batch.size()));
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(nthreads);
        for (int w = 0; w < nthreads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < batch.size(); i += nthreads)
                        results[i] = detail::harms_process_one(rfb, batch[i], params, edges);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& err : errors)
            if (err) std::rethrow_exception(err);
    }
    eab.clear();
    return results;
}

/// Stream-level wrapper: quantizes incoming local-flow events, fills the EAB
/// and flushes a batch whenever it reaches the configured width P.
class HarmsEngine {
public:
    explicit HarmsEngine(const ArmsParams& params, int workers = 1)
        : params_(params), edges_(init_window_edges(params)), rfb_(params.buffer_len),
          eab_(params.batch), workers_(workers) {}

    /// Returns the batch results when this event filled the EAB, else empty.
    std::vector<TrueFlowResult> push(const LocalFlowEvent& e) {
        eab_.push(quantize_flow_event(e, &saturations_));
        if (eab_.full()) return harms_process_batch(rfb_, eab_, params_, edges_, workers_);
        return {};
    }

    /// Flushes a trailing partial batch at end of stream.
    std::vector<TrueFlowResult> finish() {
        return harms_process_batch(rfb_, eab_, params_, edges_, workers_);
    }

    std::uint64_t saturation_count() const { return saturations_; }
    const ArmsParams& params() const { return params_; }

private:
    ArmsParams params_;
    WindowEdges edges_;
    RecentFlowBuffer<QuantizedFlowEvent> rfb_;
    EventAccumulationBuffer eab_;
    int workers_;
    std::uint64_t saturations_ = 0;
};

// ---------------------------------------------------------------------------
// Analytic cycle and throughput estimator.
// ---------------------------------------------------------------------------

/// Latency constants of the accelerator pipeline. Defaults are calibrated so
/// the benchmark point (P=24, eta=4, N=1000, 200 MHz) lands at 1.21 Mevt/s.
struct CycleModel {
    double transfer_overhead = 2500.0;  // cycles per batch
    double pipeline_fill = 400.0;       // cycles
    double divider_latency = 40.0;      // cycles per division round
    int dividers_per_averager = 4;
    double clock_hz = 200e6;
};

inline void validate(const CycleModel& m) {
    if (!(m.transfer_overhead > 0) || !(m.pipeline_fill > 0) || !(m.divider_latency > 0) ||
        m.dividers_per_averager < 1 || !(m.clock_hz > 0))
        throw ConfigError("cycle model constants must all be positive");
}

/// Cycles for one batch: shared transfer, pipeline fill, one cycle per ring
/// slot streamed, divider rounds of ceil(eta / dividers), and the final
/// eta-step maximum search.
inline double estimate_cycles(const ArmsParams& params, const CycleModel& model = {}) {
    validate(params);
    validate(model);
    const int rounds = (params.num_windows + model.dividers_per_averager - 1) /
                       model.dividers_per_averager;
    return model.transfer_overhead + model.pipeline_fill + static_cast<double>(params.buffer_len) +
           rounds * model.divider_latency + static_cast<double>(params.num_windows);
}

/// Events per second: P events complete per batch.
inline double estimate_throughput(const ArmsParams& params, const CycleModel& model = {}) {
    return params.batch * model.clock_hz / estimate_cycles(params, model);
}

} // namespace arms
