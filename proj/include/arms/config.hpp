#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "arms/errors.hpp"
#include "arms/harms.hpp"
#include "arms/local_flow.hpp"
#include "arms/types.hpp"

namespace arms {

/// Flat key=value configuration with dotted section prefixes
/// (`farms.n=1000`). Later assignments override earlier ones, which is how
/// CLI flags layer over file values.
class ConfigMap {
public:
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    /// Consumes one `key=value` assignment string; whitespace around the
    /// separator is ignored.
    void set_assignment(std::string_view text) {
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("expected key=value, got '" + std::string(text) + "'");
        auto trim = [](std::string_view s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
            return s;
        };
        std::string key(trim(text.substr(0, eq)));
        std::string val(trim(text.substr(eq + 1)));
        if (key.empty()) throw ConfigError("empty config key in '" + std::string(text) + "'");
        set(key, val);
    }

    std::string get_string(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::int64_t v{};
        const char* b = it->second.data();
        const char* e = b + it->second.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc{} || p != e)
            throw ConfigError("config key '" + key + "': expected integer, got '" + it->second + "'");
        return v;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        char* endp = nullptr;
        const double v = std::strtod(it->second.c_str(), &endp);
        if (it->second.empty() || endp != it->second.c_str() + it->second.size() || !std::isfinite(v))
            throw ConfigError("config key '" + key + "': expected number, got '" + it->second + "'");
        return v;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& v = it->second;
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError("config key '" + key + "': expected boolean, got '" + v + "'");
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

inline ConfigMap parse_config(std::istream& in) {
    ConfigMap cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv(line);
        while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
        while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t' || sv.back() == '\r')) sv.remove_suffix(1);
        if (sv.empty() || sv.front() == '#') continue;
        try {
            cfg.set_assignment(sv);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

enum class EngineKind { arms, farms, harms };

inline EngineKind engine_from_string(const std::string& name) {
    if (name == "arms") return EngineKind::arms;
    if (name == "farms") return EngineKind::farms;
    if (name == "harms") return EngineKind::harms;
    throw ConfigError("unknown engine '" + name + "' (expected arms, farms or harms)");
}

inline const char* engine_name(EngineKind k) {
    switch (k) {
    case EngineKind::arms: return "arms";
    case EngineKind::farms: return "farms";
    default: return "harms";
    }
}

/// Everything one pipeline run needs.
struct RunConfig {
    EngineKind engine = EngineKind::farms;
    ArmsParams params;
    bool precomputed_flow = false; // input already holds local-flow lines
    LocalFlowParams local_flow;
    std::string input;
    std::string output;
    std::string manifest; // optional; provides geometry and ground truth
    SensorGeometry geometry{304, 240};
    CycleModel cycle;
    int harms_workers = 1;
    std::uint64_t seed = 1;
};

inline RunConfig run_config_from(const ConfigMap& cfg) {
    RunConfig rc;
    rc.engine = engine_from_string(cfg.get_string("engine", "farms"));
    rc.params.w_max = static_cast<int>(cfg.get_int("farms.w_max", rc.params.w_max));
    rc.params.num_windows = static_cast<int>(cfg.get_int("farms.eta", rc.params.num_windows));
    rc.params.tau_us = cfg.get_int("farms.tau_us", rc.params.tau_us);
    rc.params.buffer_len = static_cast<int>(cfg.get_int("farms.n", rc.params.buffer_len));
    rc.params.batch = static_cast<int>(cfg.get_int("farms.p", rc.params.batch));
    rc.precomputed_flow = cfg.get_bool("localflow.precomputed", false);
    rc.local_flow.neighborhood_radius =
        static_cast<int>(cfg.get_int("localflow.radius", rc.local_flow.neighborhood_radius));
    rc.local_flow.fit_window_us = cfg.get_int("localflow.fit_window_us", rc.local_flow.fit_window_us);
    rc.local_flow.min_support =
        static_cast<int>(cfg.get_int("localflow.min_support", rc.local_flow.min_support));
    rc.local_flow.max_residual_us =
        cfg.get_int("localflow.max_residual_us", rc.local_flow.max_residual_us);
    rc.input = cfg.get_string("io.input");
    rc.output = cfg.get_string("io.output");
    rc.manifest = cfg.get_string("io.manifest");
    rc.geometry.width = static_cast<int>(cfg.get_int("sensor.width", rc.geometry.width));
    rc.geometry.height = static_cast<int>(cfg.get_int("sensor.height", rc.geometry.height));
    // Cycle-model keys are documented bare; the dotted form wins when both appear.
    auto cycle_key = [&cfg](const char* name, double fallback) {
        const double bare = cfg.get_double(name, fallback);
        return cfg.get_double(std::string("cycle.") + name, bare);
    };
    rc.cycle.transfer_overhead = cycle_key("transfer_overhead", rc.cycle.transfer_overhead);
    rc.cycle.pipeline_fill = cycle_key("pipeline_fill", rc.cycle.pipeline_fill);
    rc.cycle.divider_latency = cycle_key("divider_latency", rc.cycle.divider_latency);
    rc.cycle.dividers_per_averager =
        static_cast<int>(cycle_key("dividers_per_averager", rc.cycle.dividers_per_averager));
    rc.cycle.clock_hz = cycle_key("clock_hz", rc.cycle.clock_hz);
    rc.harms_workers = static_cast<int>(cfg.get_int("harms.workers", rc.harms_workers));
    rc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<std::int64_t>(rc.seed)));
    validate(rc.params);
    validate(rc.local_flow);
    validate(rc.cycle);
    return rc;
}

} // namespace arms
