#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "arms/events_io.hpp"

using namespace arms;

namespace {
const SensorGeometry kQvga{304, 240};
}

TEST_CASE("parse_events maps fields directly") {
    std::istringstream in("10,20,1000,1\n");
    const auto events = parse_events(in, kQvga);
    REQUIRE(events.size() == 1);
    CHECK(events[0].x == 10);
    CHECK(events[0].y == 20);
    CHECK(events[0].t == 1000);
    CHECK(events[0].p == 1);
}

TEST_CASE("parse_events on empty source yields empty sequence") {
    std::istringstream in("");
    CHECK(parse_events(in, kQvga).empty());
}

TEST_CASE("parse_events skips comments and blank lines, counts the rest") {
    std::istringstream in("# header\n\n1,1,10,0\n  \n2,2,20,1\n# trailing\n");
    CHECK(parse_events(in, kQvga).size() == 2);
}

TEST_CASE("parse_events reports decreasing timestamps with the line number") {
    std::istringstream in("0,0,5,1\n0,1,3,1\n");
    CHECK_THROWS_WITH(parse_events(in, kQvga),
                      Catch::Matchers::ContainsSubstring("line 2") &&
                          Catch::Matchers::ContainsSubstring("decreasing"));
}

TEST_CASE("parse_events reports out-of-bounds coordinates with the line number") {
    std::istringstream in("1,1,10,0\n304,10,20,1\n");
    CHECK_THROWS_WITH(parse_events(in, kQvga),
                      Catch::Matchers::ContainsSubstring("line 2") &&
                          Catch::Matchers::ContainsSubstring("outside"));
}

TEST_CASE("parse_events rejects malformed lines") {
    {
        std::istringstream in("1,2,3\n");
        CHECK_THROWS_AS(parse_events(in, kQvga), ParseError);
    }
    {
        std::istringstream in("a,2,3,1\n");
        CHECK_THROWS_AS(parse_events(in, kQvga), ParseError);
    }
    {
        std::istringstream in("1,2,3,7\n");
        CHECK_THROWS_AS(parse_events(in, kQvga), ParseError);
    }
}

TEST_CASE("write_flow emits the documented line format") {
    std::ostringstream out;
    write_flow({TrueFlowResult{1, 2, 3, 0.5, -0.5, 0}}, out);
    CHECK(out.str() == "1,2,3,0.500000,-0.500000,0\n");

    std::ostringstream empty;
    write_flow({}, empty);
    CHECK(empty.str().empty());
}

TEST_CASE("flow files round-trip at the printed precision") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> v(-500.0, 500.0);
    std::uniform_int_distribution<int> px(0, 300);
    std::vector<TrueFlowResult> results;
    for (int i = 0; i < 100; ++i)
        results.push_back(TrueFlowResult{px(rng), px(rng), 1000 * i, v(rng), v(rng), i % 4});

    std::ostringstream out;
    write_flow(results, out);
    std::istringstream in(out.str());
    const auto parsed = parse_flow(in);
    REQUIRE(parsed.size() == results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(parsed[i].x == results[i].x);
        CHECK(parsed[i].t == results[i].t);
        CHECK(parsed[i].window == results[i].window);
        CHECK(std::abs(parsed[i].vx - results[i].vx) <= 5e-7);
        CHECK(std::abs(parsed[i].vy - results[i].vy) <= 5e-7);
    }
}

TEST_CASE("local-flow files recompute a missing magnitude and verify a present one") {
    {
        std::istringstream in("5,6,100,3.0,4.0\n");
        const auto events = parse_local_flow(in);
        REQUIRE(events.size() == 1);
        CHECK(events[0].mag == Catch::Approx(5.0));
    }
    {
        std::istringstream in("5,6,100,3.0,4.0,5.0\n");
        CHECK(parse_local_flow(in).size() == 1);
    }
    {
        std::istringstream in("5,6,100,3.0,4.0,6.0\n");
        CHECK_THROWS_AS(parse_local_flow(in), ParseError);
    }
    {
        std::istringstream in("5,6,100,0.0,0.0\n");
        CHECK_THROWS_AS(parse_local_flow(in), ParseError);
    }
}

TEST_CASE("local-flow writer round-trips through the parser") {
    std::vector<LocalFlowEvent> events;
    events.push_back(make_local_flow_event(1, 2, 10, 12.25, -3.5));
    events.push_back(make_local_flow_event(3, 4, 20, -0.125, 100.0));
    std::ostringstream out;
    write_local_flow(events, out);
    std::istringstream in(out.str());
    const auto parsed = parse_local_flow(in);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].vx == Catch::Approx(12.25).margin(1e-7));
    CHECK(parsed[1].vy == Catch::Approx(100.0).margin(1e-7));
}

TEST_CASE("generator rejects bad configuration") {
    CHECK_THROWS_AS(generate_bar_square(SensorGeometry{0, 240}, 100.0, 90.0, 1000000),
                    ConfigError);
    CHECK_THROWS_AS(generate_bar_square(kQvga, -5.0, 90.0, 1000000), ConfigError);
    CHECK_THROWS_AS(generate_bar_square(kQvga, 100.0, 90.0, 0), ConfigError);
}

TEST_CASE("generator manifest records one segment covering the duration") {
    const auto ds = generate_bar_square(kQvga, 100.0, 90.0, 1000000);
    CHECK(ds.manifest.truth_kind == TruthKind::angle);
    REQUIRE(ds.manifest.segments.size() == 1);
    CHECK(ds.manifest.segments[0].direction_deg == 90.0);
    CHECK(ds.manifest.segments[0].t_begin_us == 0);
    CHECK(ds.manifest.segments[0].t_end_us == 1000000);
    CHECK(ds.manifest.duration_us == 1000000);
    CHECK(!ds.events.empty());
}

TEST_CASE("generator output is deterministic for a fixed seed") {
    const auto a = generate_bar_square(kQvga, 120.0, 45.0, 500000, 1.0, 42);
    const auto b = generate_bar_square(kQvga, 120.0, 45.0, 500000, 1.0, 42);
    std::ostringstream sa, sb;
    write_events(a.events, sa);
    write_events(b.events, sb);
    CHECK(sa.str() == sb.str());

    const auto c = generate_bar_square(kQvga, 120.0, 45.0, 500000, 1.0, 43);
    std::ostringstream sc;
    write_events(c.events, sc);
    CHECK(sa.str() != sc.str());
}

TEST_CASE("parsing is total on generator output") {
    const auto ds = generate_bar_square(kQvga, 150.0, 90.0, 400000, 1.0, 5);
    std::ostringstream out;
    write_events(ds.events, out);
    std::istringstream in(out.str());
    const auto parsed = parse_events(in, kQvga);
    REQUIRE(parsed.size() == ds.events.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].x == ds.events[i].x);
        CHECK(parsed[i].y == ds.events[i].y);
        CHECK(parsed[i].t == ds.events[i].t);
        CHECK(parsed[i].p == ds.events[i].p);
    }
}

TEST_CASE("vertical-bar edge events at columns c and c+10 sit 100 ms apart") {
    BarSquareConfig cfg;
    cfg.geometry = kQvga;
    cfg.phases.push_back(MotionPhase{100.0, 0.0, 900000}); // moving right
    cfg.include_square = false;
    cfg.include_h_bar = false;
    cfg.seed = 3;
    const auto ds = generate_bar_square(cfg);
    REQUIRE(!ds.events.empty());

    // Leading-edge events per row, away from the caps.
    std::map<int, std::map<int, std::int64_t>> row_events;
    const int y_mid = static_cast<int>(0.38 * kQvga.height);
    for (const auto& e : ds.events) {
        if (e.p != 1) continue;
        if (std::abs(e.y - y_mid) > 8) continue;
        row_events[e.y][e.x] = e.t;
    }
    int checked = 0;
    for (const auto& [y, cols] : row_events) {
        for (const auto& [x, t] : cols) {
            auto it = cols.find(x + 10);
            if (it == cols.end()) continue;
            CHECK(std::abs((it->second - t) - 100000) <= 200);
            ++checked;
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("generated events stay in bounds, ordered and inside the duration") {
    BarSquareConfig cfg;
    cfg.geometry = kQvga;
    cfg.phases.push_back(MotionPhase{150.0, 90.0, 300000});
    cfg.phases.push_back(MotionPhase{150.0, 270.0, 300000});
    cfg.timestamp_noise_us = 500;
    const auto ds = generate_bar_square(cfg);
    REQUIRE(!ds.events.empty());
    CHECK(ds.manifest.truth_kind == TruthKind::segments);
    CHECK(ds.manifest.segments.size() == 2);
    std::int64_t last = 0;
    for (const auto& e : ds.events) {
        CHECK(kQvga.contains(e.x, e.y));
        CHECK(e.t >= last);
        CHECK(e.t <= ds.manifest.duration_us);
        last = e.t;
    }
}

TEST_CASE("manifest files round-trip") {
    DatasetManifest m;
    m.name = "demo";
    m.geometry = kQvga;
    m.event_path = "demo.events.csv";
    m.truth_kind = TruthKind::angle;
    m.segments.push_back(TruthSegment{0, 1000000, 90.0, 100.0});
    m.duration_us = 1000000;

    std::ostringstream out;
    write_manifest(m, out);
    std::istringstream in(out.str());
    const auto back = read_manifest(in);
    CHECK(back.name == "demo");
    CHECK(back.geometry.width == 304);
    CHECK(back.event_path == "demo.events.csv");
    CHECK(back.truth_kind == TruthKind::angle);
    REQUIRE(back.segments.size() == 1);
    CHECK(back.segments[0].direction_deg == Catch::Approx(90.0));
    CHECK(back.duration_us == 1000000);
}

TEST_CASE("truth segment files round-trip") {
    std::vector<TruthSegment> segs{{0, 500000, 90.0, 150.0}, {500000, 1000000, 270.0, 150.0}};
    std::ostringstream out;
    write_truth_segments(segs, out);
    std::istringstream in(out.str());
    const auto back = read_truth_segments(in);
    REQUIRE(back.size() == 2);
    CHECK(back[1].direction_deg == Catch::Approx(270.0));
    CHECK(back[1].t_begin_us == 500000);
}
