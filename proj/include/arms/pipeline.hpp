#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "arms/arms_ref.hpp"
#include "arms/config.hpp"
#include "arms/errors.hpp"
#include "arms/events_io.hpp"
#include "arms/farms.hpp"
#include "arms/harms.hpp"
#include "arms/local_flow.hpp"
#include "arms/metrics.hpp"

namespace arms {

struct RunSummary {
    std::size_t raw_events = 0;   // 0 when the input was precomputed flow
    std::size_t flow_events = 0;  // valid local-flow events fed to the engine
    std::size_t results = 0;
    double wall_seconds = 0.0;    // engine loop only, file I/O excluded
    double compute_rate = 0.0;    // flow_events / wall_seconds
    std::uint64_t loop_iterations = 0;
    std::uint64_t saturations = 0; // harms input quantization
    std::string output_path;
};

namespace detail {

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open input file '" + path + "'");
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file '" + path + "'");
    return out;
}

} // namespace detail

/// Loads the configured input and runs the local-flow front end when the
/// input is raw events. Returns the engine-ready stream.
inline std::vector<LocalFlowEvent> load_flow_stream(const RunConfig& config,
                                                    std::size_t* raw_count = nullptr) {
    SensorGeometry geometry = config.geometry;
    if (!config.manifest.empty()) {
        auto in = detail::open_input(config.manifest);
        geometry = read_manifest(in).geometry;
    }
    if (config.input.empty()) throw ConfigError("io.input is required");
    auto in = detail::open_input(config.input);
    if (config.precomputed_flow) {
        if (raw_count) *raw_count = 0;
        return parse_local_flow(in);
    }
    const auto raw = parse_events(in, geometry);
    if (raw_count) *raw_count = raw.size();
    return local_flow_stream(raw, geometry, config.local_flow);
}

/// Runs the selected engine over a prepared local-flow stream. Only the
/// engine loop is timed.
inline std::vector<TrueFlowResult> run_engine(const RunConfig& config,
                                              const std::vector<LocalFlowEvent>& flow,
                                              RunSummary& summary) {
    validate(config.params);
    SensorGeometry geometry = config.geometry;
    if (!config.manifest.empty()) {
        auto in = detail::open_input(config.manifest);
        geometry = read_manifest(in).geometry;
    }

    std::vector<TrueFlowResult> results;
    results.reserve(flow.size());
    const auto start = std::chrono::steady_clock::now();

    switch (config.engine) {
    case EngineKind::arms: {
        FlowFrame frame(geometry);
        for (const auto& e : flow) {
            frame.write(e);
            auto [r, stats] = arms_true_flow(frame, e, config.params);
            summary.loop_iterations += stats.loop_iterations;
            results.push_back(r);
        }
        break;
    }
    case EngineKind::farms: {
        FarmsEngine engine(config.params);
        for (const auto& e : flow) results.push_back(engine.process(e));
        summary.loop_iterations = engine.total_iterations();
        break;
    }
    case EngineKind::harms: {
        HarmsEngine engine(config.params, config.harms_workers);
        for (const auto& e : flow) {
            auto batch = engine.push(e);
            results.insert(results.end(), batch.begin(), batch.end());
        }
        auto tail = engine.finish();
        results.insert(results.end(), tail.begin(), tail.end());
        summary.saturations = engine.saturation_count();
        break;
    }
    }

    const auto end = std::chrono::steady_clock::now();
    summary.wall_seconds = std::chrono::duration<double>(end - start).count();
    summary.flow_events = flow.size();
    summary.results = results.size();
    summary.compute_rate =
        summary.wall_seconds > 0.0 ? static_cast<double>(flow.size()) / summary.wall_seconds : 0.0;
    return results;
}

/// Full pipeline: ingest, local flow, engine, flow-file output.
inline RunSummary run_pipeline(const RunConfig& config) {
    RunSummary summary;
    const auto flow = load_flow_stream(config, &summary.raw_events);
    const auto results = run_engine(config, flow, summary);
    if (!config.output.empty()) {
        auto out = detail::open_output(config.output);
        write_flow(results, out);
        summary.output_path = config.output;
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Benchmark sweeps.
// ---------------------------------------------------------------------------

struct BenchRow {
    std::string engine;
    ArmsParams params;
    std::size_t events = 0;
    double wall_seconds = 0.0;
    double compute_rate = 0.0;
    std::uint64_t iterations_per_event = 0;
    std::uint64_t closed_form_iterations = 0;
    double circular_std_deg = 0.0;
    double pooled_mode_std_deg = 0.0;
    double model_throughput = 0.0; // harms only
};

/// One sweep axis: a config key and its values.
struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

/// Runs the cartesian product of the sweep axes over one preloaded input
/// stream. Iteration counters are cross-checked against the closed forms;
/// a mismatch aborts the sweep.
inline std::vector<BenchRow> bench(const ConfigMap& base, const std::vector<SweepAxis>& sweep) {
    if (sweep.empty()) throw ConfigError("bench needs a non-empty sweep grid");
    for (const auto& axis : sweep) {
        if (axis.values.empty()) throw ConfigError("sweep axis '" + axis.key + "' has no values");
        if (axis.key.rfind("io.", 0) == 0 || axis.key.rfind("localflow.", 0) == 0)
            throw ConfigError("bench sweeps engine parameters; '" + axis.key + "' changes the input");
    }

    const RunConfig base_config = run_config_from(base);
    const auto flow = load_flow_stream(base_config);
    if (flow.empty()) throw ArgumentError("bench input produced no local-flow events");

    std::vector<std::size_t> index(sweep.size(), 0);
    std::vector<BenchRow> rows;
    while (true) {
        ConfigMap point = base;
        for (std::size_t a = 0; a < sweep.size(); ++a)
            point.set(sweep[a].key, sweep[a].values[index[a]]);
        const RunConfig rc = run_config_from(point);

        RunSummary summary;
        const auto results = run_engine(rc, flow, summary);

        BenchRow row;
        row.engine = engine_name(rc.engine);
        row.params = rc.params;
        row.events = flow.size();
        row.wall_seconds = summary.wall_seconds;
        row.compute_rate = summary.compute_rate;
        row.iterations_per_event = summary.loop_iterations / std::max<std::size_t>(1, flow.size());
        switch (rc.engine) {
        case EngineKind::arms:
            row.closed_form_iterations = arms_iteration_count(rc.params);
            break;
        case EngineKind::farms:
            row.closed_form_iterations = farms_iteration_count(rc.params);
            break;
        case EngineKind::harms:
            row.closed_form_iterations = 0;
            row.model_throughput = estimate_throughput(rc.params, rc.cycle);
            break;
        }
        if (row.closed_form_iterations != 0 &&
            row.iterations_per_event != row.closed_form_iterations)
            throw Error("instrumented iterations " + std::to_string(row.iterations_per_event) +
                        " disagree with closed form " + std::to_string(row.closed_form_iterations) +
                        " for engine " + row.engine);

        const auto dirs = flow_directions_deg(results);
        const auto stats = direction_modes(dirs);
        row.circular_std_deg = stats.circular_std_deg;
        row.pooled_mode_std_deg = stats.pooled_mode_std_deg();
        rows.push_back(row);

        std::size_t a = 0;
        for (; a < sweep.size(); ++a) {
            if (++index[a] < sweep[a].values.size()) break;
            index[a] = 0;
        }
        if (a == sweep.size()) break;
    }
    return rows;
}

inline void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
    out << "engine,w_max,eta,tau_us,n,p,events,wall_s,compute_rate_evt_s,"
           "iterations_per_event,closed_form_iterations,circular_std_deg,"
           "pooled_mode_std_deg,model_throughput_evt_s\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.engine << ',' << r.params.w_max << ',' << r.params.num_windows << ','
            << r.params.tau_us << ',' << r.params.buffer_len << ',' << r.params.batch << ','
            << r.events << ',';
        std::snprintf(buf, sizeof buf, "%.6g", r.wall_seconds);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.6g", r.compute_rate);
        out << buf << ',' << r.iterations_per_event << ',' << r.closed_form_iterations << ',';
        std::snprintf(buf, sizeof buf, "%.6g", r.circular_std_deg);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.6g", r.pooled_mode_std_deg);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.6g", r.model_throughput);
        out << buf << '\n';
    }
    if (!out) throw IoError("failed writing benchmark CSV");
}

// ---------------------------------------------------------------------------
// Engine comparison.
// ---------------------------------------------------------------------------

struct CompareReport {
    std::size_t events = 0;
    std::size_t window_matches = 0;
    double max_dvx = 0.0;         // over window-matching events
    double max_dvy = 0.0;
    double max_gap_at_mismatch = 0.0; // largest top-two mean gap where windows differ
};

/// Per-event comparison of two result streams over the same input.
inline CompareReport compare_results(const std::vector<TrueFlowResult>& a,
                                     const std::vector<TrueFlowResult>& b) {
    if (a.size() != b.size())
        throw ArgumentError("compare: result streams differ in length (" +
                            std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    CompareReport rep;
    rep.events = a.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].window == b[i].window) {
            ++rep.window_matches;
            rep.max_dvx = std::max(rep.max_dvx, std::abs(a[i].vx - b[i].vx));
            rep.max_dvy = std::max(rep.max_dvy, std::abs(a[i].vy - b[i].vy));
        }
    }
    return rep;
}

/// Human/machine-readable key=value summary (the CLI `run` output).
inline void write_summary(const RunSummary& s, std::ostream& out) {
    char buf[64];
    out << "raw_events=" << s.raw_events << '\n';
    out << "flow_events=" << s.flow_events << '\n';
    out << "results=" << s.results << '\n';
    std::snprintf(buf, sizeof buf, "%.6f", s.wall_seconds);
    out << "wall_seconds=" << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.1f", s.compute_rate);
    out << "compute_rate_evt_s=" << buf << '\n';
    out << "loop_iterations=" << s.loop_iterations << '\n';
    out << "saturations=" << s.saturations << '\n';
    if (!s.output_path.empty()) out << "output=" << s.output_path << '\n';
}

} // namespace arms
