// Command-line front end: synthetic data generation, the local-flow front
// end, true-flow engine runs, parameter sweeps, engine comparison and metric
// reports. Exit codes: 0 success, 2 configuration error, 3 data error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "arms/arms.hpp"

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw arms::IoError("cannot open '" + path + "'");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw arms::IoError("cannot write '" + path + "'");
    return out;
}

arms::ConfigMap load_config(const std::string& config_path,
                            const std::vector<std::string>& overrides) {
    arms::ConfigMap cfg;
    if (!config_path.empty()) {
        auto in = open_in(config_path);
        cfg = arms::parse_config(in);
    }
    for (const auto& kv : overrides) cfg.set_assignment(kv);
    return cfg;
}

arms::MotionPhase parse_phase(const std::string& text) {
    // speed:direction:duration_us
    arms::MotionPhase ph;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lld", &ph.speed_px_s, &ph.direction_deg,
                    reinterpret_cast<long long*>(&ph.duration_us)) != 3)
        throw arms::ConfigError("bad --phase '" + text + "', expected speed:direction:duration_us");
    return ph;
}

int cmd_generate(const std::string& out_path, const std::string& manifest_path,
                 const std::string& truth_path, arms::BarSquareConfig cfg,
                 double speed, double direction, std::int64_t duration_us,
                 const std::vector<std::string>& phase_args) {
    for (const auto& p : phase_args) cfg.phases.push_back(parse_phase(p));
    if (cfg.phases.empty()) cfg.phases.push_back(arms::MotionPhase{speed, direction, duration_us});

    auto ds = arms::generate_bar_square(cfg);
    ds.manifest.event_path = out_path;
    {
        auto out = open_out(out_path);
        arms::write_events(ds.events, out);
    }
    if (ds.manifest.truth_kind == arms::TruthKind::segments) {
        const std::string tp = truth_path.empty() ? out_path + ".truth.csv" : truth_path;
        auto out = open_out(tp);
        arms::write_truth_segments(ds.manifest.segments, out);
        ds.manifest.truth_path = tp;
    }
    if (!manifest_path.empty()) {
        auto out = open_out(manifest_path);
        arms::write_manifest(ds.manifest, out);
    }
    std::cout << "events=" << ds.events.size() << "\n";
    std::cout << "duration_us=" << ds.manifest.duration_us << "\n";
    std::cout << "output=" << out_path << "\n";
    return 0;
}

int cmd_localflow(const arms::ConfigMap& cfg) {
    const arms::RunConfig rc = arms::run_config_from(cfg);
    if (rc.input.empty() || rc.output.empty())
        throw arms::ConfigError("localflow needs io.input and io.output");
    arms::SensorGeometry geometry = rc.geometry;
    if (!rc.manifest.empty()) {
        auto in = open_in(rc.manifest);
        geometry = arms::read_manifest(in).geometry;
    }
    auto in = open_in(rc.input);
    const auto raw = arms::parse_events(in, geometry);
    const auto flow = arms::local_flow_stream(raw, geometry, rc.local_flow);
    auto out = open_out(rc.output);
    arms::write_local_flow(flow, out);
    std::cout << "raw_events=" << raw.size() << "\n";
    std::cout << "flow_events=" << flow.size() << "\n";
    std::cout << "output=" << rc.output << "\n";
    return 0;
}

int cmd_run(const arms::ConfigMap& cfg) {
    const arms::RunConfig rc = arms::run_config_from(cfg);
    const auto summary = arms::run_pipeline(rc);
    arms::write_summary(summary, std::cout);
    return 0;
}

int cmd_bench(const arms::ConfigMap& cfg, const std::vector<std::string>& sweep_args,
              const std::string& out_path) {
    std::vector<arms::SweepAxis> sweep;
    for (const auto& s : sweep_args) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw arms::ConfigError("bad --sweep '" + s + "', expected key=v1,v2,...");
        arms::SweepAxis axis;
        axis.key = s.substr(0, eq);
        std::stringstream values(s.substr(eq + 1));
        std::string v;
        while (std::getline(values, v, ',')) axis.values.push_back(v);
        sweep.push_back(std::move(axis));
    }
    const auto rows = arms::bench(cfg, sweep);
    if (out_path.empty()) {
        arms::write_bench_csv(rows, std::cout);
    } else {
        auto out = open_out(out_path);
        arms::write_bench_csv(rows, out);
        std::cout << "rows=" << rows.size() << "\n";
        std::cout << "output=" << out_path << "\n";
    }
    return 0;
}

int cmd_compare(const arms::ConfigMap& cfg, const std::string& engine_a,
                const std::string& engine_b) {
    arms::RunConfig rc = arms::run_config_from(cfg);
    const auto flow = arms::load_flow_stream(rc);

    rc.engine = arms::engine_from_string(engine_a);
    arms::RunSummary sa;
    const auto ra = arms::run_engine(rc, flow, sa);
    rc.engine = arms::engine_from_string(engine_b);
    arms::RunSummary sb;
    const auto rb = arms::run_engine(rc, flow, sb);

    const auto rep = arms::compare_results(ra, rb);
    char buf[64];
    std::cout << "events=" << rep.events << "\n";
    std::cout << "window_matches=" << rep.window_matches << "\n";
    std::snprintf(buf, sizeof buf, "%.9g", rep.max_dvx);
    std::cout << "max_dvx=" << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.9g", rep.max_dvy);
    std::cout << "max_dvy=" << buf << "\n";
    return 0;
}

int cmd_metrics(const std::string& flow_path, const std::string& manifest_path,
                double bin_width, const std::string& histogram_path, double engine_rate) {
    auto in = open_in(flow_path);
    const auto results = arms::parse_flow(in);
    if (results.empty()) throw arms::ArgumentError("flow file '" + flow_path + "' is empty");

    const auto dirs = arms::flow_directions_deg(results);
    const auto stats = arms::direction_modes(dirs, bin_width);

    char buf[64];
    std::cout << "count=" << results.size() << "\n";
    std::snprintf(buf, sizeof buf, "%.4f", stats.mean_angle_deg);
    std::cout << "mean_angle_deg=" << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.4f", stats.circular_std_deg);
    std::cout << "circular_std_deg=" << buf << "\n";
    std::cout << "mode_count=" << stats.mode_count << "\n";
    for (std::size_t i = 0; i < stats.per_mode.size(); ++i) {
        const auto& m = stats.per_mode[i];
        std::snprintf(buf, sizeof buf, "%.4f", m.angle_deg);
        std::cout << "mode_" << i << "_angle_deg=" << buf << "\n";
        std::snprintf(buf, sizeof buf, "%.4f", m.circular_std_deg);
        std::cout << "mode_" << i << "_std_deg=" << buf << "\n";
        std::cout << "mode_" << i << "_count=" << m.count << "\n";
    }
    std::snprintf(buf, sizeof buf, "%.4f", stats.pooled_mode_std_deg());
    std::cout << "pooled_mode_std_deg=" << buf << "\n";

    if (!manifest_path.empty()) {
        auto min = open_in(manifest_path);
        const auto manifest = arms::read_manifest(min);
        const auto report =
            arms::realtime_check(results.size(), manifest.duration_us, engine_rate);
        std::snprintf(buf, sizeof buf, "%.2f", report.true_flow_rate);
        std::cout << "true_flow_rate_evt_s=" << buf << "\n";
        if (engine_rate > 0.0) {
            std::snprintf(buf, sizeof buf, "%.2f", report.compute_rate);
            std::cout << "compute_rate_evt_s=" << buf << "\n";
            std::cout << "realtime=" << (report.realtime ? 1 : 0) << "\n";
        }

        std::vector<arms::TruthSegment> segments = manifest.segments;
        if (manifest.truth_kind == arms::TruthKind::segments && !manifest.truth_path.empty()) {
            auto tin = open_in(manifest.truth_path);
            segments = arms::read_truth_segments(tin);
        }
        if (!segments.empty()) {
            std::vector<arms::Sample> truth_vx, truth_vy, flow_vx, flow_vy;
            const double deg = 3.14159265358979323846 / 180.0;
            for (const auto& seg : segments) {
                for (std::int64_t t = seg.t_begin_us; t < seg.t_end_us; t += 1000) {
                    truth_vx.push_back({t, seg.speed_px_s * std::cos(seg.direction_deg * deg)});
                    truth_vy.push_back({t, seg.speed_px_s * std::sin(seg.direction_deg * deg)});
                }
            }
            for (const auto& r : results) {
                flow_vx.push_back({r.t, r.vx});
                flow_vy.push_back({r.t, r.vy});
            }
            if (segments.front().speed_px_s > 0.0) {
                const double rvx = arms::pearson_correlation(flow_vx, truth_vx);
                const double rvy = arms::pearson_correlation(flow_vy, truth_vy);
                std::snprintf(buf, sizeof buf, "%.4f", rvx);
                std::cout << "pearson_vx=" << buf << "\n";
                std::snprintf(buf, sizeof buf, "%.4f", rvy);
                std::cout << "pearson_vy=" << buf << "\n";
            }
        }
    }

    if (!histogram_path.empty()) {
        auto out = open_out(histogram_path);
        const int nbins = static_cast<int>(std::lround(360.0 / bin_width));
        std::vector<std::size_t> hist(nbins, 0);
        for (double d : dirs) {
            int b = static_cast<int>(arms::detail::wrap_deg(d) / bin_width);
            if (b >= nbins) b = nbins - 1;
            ++hist[b];
        }
        out << "bin_center_deg,count\n";
        for (int b = 0; b < nbins; ++b) {
            std::snprintf(buf, sizeof buf, "%.3f", (b + 0.5) * bin_width);
            out << buf << ',' << hist[b] << "\n";
        }
        if (!out) throw arms::IoError("failed writing histogram CSV");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Aperture-robust event-camera optical flow toolkit"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "Synthesize a Bar-Square event recording");
    std::string gen_out, gen_manifest, gen_truth;
    arms::BarSquareConfig gen_cfg;
    double gen_speed = 150.0, gen_direction = 90.0;
    std::int64_t gen_duration = 1000000;
    std::vector<std::string> gen_phases;
    bool no_square = false, no_hbar = false, no_vbar = false;
    generate->add_option("--out", gen_out, "Event file to write")->required();
    generate->add_option("--manifest", gen_manifest, "Manifest file to write");
    generate->add_option("--truth-out", gen_truth, "Truth segments file (multi-phase runs)");
    generate->add_option("--width", gen_cfg.geometry.width, "Sensor width in pixels");
    generate->add_option("--height", gen_cfg.geometry.height, "Sensor height in pixels");
    generate->add_option("--speed", gen_speed, "Speed in px/s");
    generate->add_option("--direction", gen_direction, "Motion direction in degrees");
    generate->add_option("--duration-us", gen_duration, "Duration in microseconds");
    generate->add_option("--phase", gen_phases,
                         "speed:direction:duration_us (repeatable, overrides the scalars)");
    generate->add_option("--rate", gen_cfg.edge_event_rate, "Events per pixel crossing");
    generate->add_option("--tilt", gen_cfg.bar_tilt_deg, "Vertical-bar tilt in degrees");
    generate->add_option("--noise-us", gen_cfg.timestamp_noise_us, "Uniform timestamp noise bound");
    generate->add_option("--seed", gen_cfg.seed, "Generator seed");
    generate->add_option("--name", gen_cfg.name, "Dataset name");
    generate->add_flag("--no-square", no_square, "Drop the square from the scene");
    generate->add_flag("--no-hbar", no_hbar, "Drop the horizontal bar");
    generate->add_flag("--no-vbar", no_vbar, "Drop the vertical bar");

    // shared config plumbing for engine-facing subcommands
    std::string config_path, bench_out, compare_a = "farms", compare_b = "harms";
    std::vector<std::string> overrides, sweeps;
    auto add_cfg = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value config file");
        sub->add_option("--set", overrides, "config override key=value (repeatable)");
    };

    auto* localflow = app.add_subcommand("localflow", "Raw events to local-flow events");
    add_cfg(localflow);

    auto* run = app.add_subcommand("run", "Run one true-flow engine over a stream");
    add_cfg(run);

    auto* bench = app.add_subcommand("bench", "Sweep engine parameters, emit CSV");
    add_cfg(bench);
    bench->add_option("--sweep", sweeps, "key=v1,v2,... (repeatable, cartesian)")->required();
    bench->add_option("--out", bench_out, "CSV output path (default stdout)");

    auto* compare = app.add_subcommand("compare", "Run two engines on one input and diff");
    add_cfg(compare);
    compare->add_option("--engine-a", compare_a, "First engine");
    compare->add_option("--engine-b", compare_b, "Second engine");

    auto* metrics = app.add_subcommand("metrics", "Direction statistics for a flow file");
    std::string met_flow, met_manifest, met_hist;
    double met_bin = 5.0, met_rate = 0.0;
    metrics->add_option("--flow", met_flow, "Flow results file")->required();
    metrics->add_option("--manifest", met_manifest, "Dataset manifest (enables truth metrics)");
    metrics->add_option("--bin-width", met_bin, "Histogram bin width in degrees");
    metrics->add_option("--histogram", met_hist, "Write histogram CSV here");
    metrics->add_option("--rate", met_rate, "Engine compute rate for the realtime verdict");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate->parsed()) {
            gen_cfg.include_square = !no_square;
            gen_cfg.include_h_bar = !no_hbar;
            gen_cfg.include_v_bar = !no_vbar;
            return cmd_generate(gen_out, gen_manifest, gen_truth, gen_cfg, gen_speed,
                                gen_direction, gen_duration, gen_phases);
        }
        const arms::ConfigMap cfg = load_config(config_path, overrides);
        if (localflow->parsed()) return cmd_localflow(cfg);
        if (run->parsed()) return cmd_run(cfg);
        if (bench->parsed()) return cmd_bench(cfg, sweeps, bench_out);
        if (compare->parsed()) return cmd_compare(cfg, compare_a, compare_b);
        if (metrics->parsed()) return cmd_metrics(met_flow, met_manifest, met_bin, met_hist, met_rate);
    } catch (const arms::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const arms::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
