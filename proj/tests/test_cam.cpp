#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "v2xsim/cam/trigger.hpp"
#include "v2xsim/core/rng.hpp"
#include "v2xsim/mobility/generators.hpp"

using namespace v2x;
using namespace v2x::cam;

namespace {

Kinematics kin(SimTime t, double x, double y, double speed, double heading) {
    return {t, x, y, speed, heading};
}

// Independent re-derivation: scans every grid point and recomputes the
// trigger deltas from raw trace values with its own arithmetic. Used as the
// oracle for generate_cam_stream.
std::vector<SimTime> brute_force_cam_times(const mob::Trace& tr, const Thresholds& th) {
    std::vector<SimTime> times;
    if (tr.samples.empty()) return times;
    std::size_t ref = 0;
    times.push_back(tr.samples[0].t);
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
        const auto& a = tr.samples[ref];
        const auto& b = tr.samples[i];
        bool fire = false;
        if (b.t - a.t >= th.max_interval_ms) fire = true;
        if (!fire) {
            const double dx = b.x - a.x, dy = b.y - a.y;
            if (std::sqrt(dx * dx + dy * dy) > th.position_m - 1e-9) fire = true;
        }
        if (!fire) {
            double dh = std::fabs(b.heading - a.heading);
            if (dh > 180.0) dh = 360.0 - dh;
            if (dh > th.heading_deg - 1e-9) fire = true;
        }
        if (!fire && std::fabs(b.speed - a.speed) > th.speed_mps - 1e-9) fire = true;
        if (fire) {
            times.push_back(b.t);
            ref = i;
        }
    }
    return times;
}

mob::Trace random_walk_trace(VehicleId id, SimTime duration_ms, std::uint64_t seed) {
    RngStream rng(seed);
    mob::Trace tr;
    tr.vehicle = id;
    Kinematics k;
    k.speed = rng.uniform(0.0, 35.0);
    k.heading = rng.uniform(0.0, 360.0);
    for (SimTime t = 0; t <= duration_ms; t += kGridMs) {
        k.t = t;
        tr.samples.push_back(k);
        k.speed = std::max(0.0, std::min(40.0, k.speed + rng.gaussian(0.6)));
        k.heading = mob::normalize_heading(k.heading + rng.gaussian(1.5));
        double ux, uy;
        mob::heading_to_dir(k.heading, ux, uy);
        k.x += k.speed * 0.1 * ux;
        k.y += k.speed * 0.1 * uy;
    }
    return tr;
}

} // namespace

TEST_CASE("heading_diff handles wraparound") {
    CHECK(heading_diff(355.0, 5.0) == doctest::Approx(10.0));
    CHECK(heading_diff(5.0, 355.0) == doctest::Approx(10.0));
    CHECK(heading_diff(0.0, 0.0) == 0.0);
    CHECK(heading_diff(90.0, 270.0) == doctest::Approx(180.0));
    CHECK(heading_diff(355.0, 30.0) == doctest::Approx(35.0)); // 355 nearer 5 than 30
}

TEST_CASE("heading_diff is symmetric and satisfies the circle triangle inequality") {
    RngStream rng(99);
    for (int i = 0; i < 2000; ++i) {
        const double a = rng.uniform(0.0, 360.0);
        const double b = rng.uniform(0.0, 360.0);
        const double c = rng.uniform(0.0, 360.0);
        CHECK(heading_diff(a, b) == heading_diff(b, a));
        CHECK(heading_diff(a, c) <= heading_diff(a, b) + heading_diff(b, c) + 1e-12);
    }
}

TEST_CASE("check_trigger follows the fixed priority order") {
    const Kinematics ref = kin(0, 0, 0, 10, 0);

    // position change beyond 4 m
    CHECK(check_trigger(ref, kin(100, 4.05, 0, 10, 0), 100) == TriggerCause::position);
    // all small: nothing fires
    CHECK(check_trigger(ref, kin(100, 1.0, 0, 10.5, 1.0), 100) == TriggerCause::none);
    // elapsed hits the ceiling regardless of kinematics
    CHECK(check_trigger(ref, kin(1000, 0, 0, 10, 0), 1000) == TriggerCause::time);
    // heading change beyond 4 degrees
    CHECK(check_trigger(ref, kin(100, 0, 0, 10, 4.1), 100) == TriggerCause::heading);
    CHECK(check_trigger(ref, kin(100, 0, 0, 10, 355.0), 100) == TriggerCause::heading);
    // speed change beyond 4 m/s
    CHECK(check_trigger(ref, kin(100, 0, 0, 14.5, 0), 100) == TriggerCause::speed);
    // position outranks heading and speed when several cross
    CHECK(check_trigger(ref, kin(100, 5.0, 0, 20, 90), 100) == TriggerCause::position);
}

TEST_CASE("trigger boundary: grid samples that reach the threshold fire") {
    // Sampled continuous motion: a delta landing numerically on the
    // threshold has reached it (20 m/s hits 4.000 m at the 200 ms sample).
    const Kinematics ref = kin(0, 0, 0, 20, 0);
    CHECK(check_trigger(ref, kin(200, 4.0, 0, 20, 0), 200) == TriggerCause::position);
    // clearly below stays silent
    CHECK(check_trigger(ref, kin(200, 3.999999, 0, 20, 0), 200) == TriggerCause::none);
}

TEST_CASE("fixed 20 m/s straight: every IPT exactly 200 ms") {
    mob::StraightParams p;
    p.lanes = 1;
    p.vehicles_per_lane = 1;
    p.lane_speeds_mps = {20.0};
    p.duration_ms = 10000;
    const auto traces = mob::gen_straight_highway(p, 1);
    const auto events = generate_cam_stream(traces[0]);
    REQUIRE(events.size() > 10);
    for (std::size_t i = 1; i < events.size(); ++i) {
        CHECK(events[i].ipt_ms == 200);
        CHECK(events[i].cause == TriggerCause::position);
    }
}

TEST_CASE("fixed 23 m/s straight: 174 ms crossing quantizes to 200 ms on the grid") {
    mob::StraightParams p;
    p.lanes = 1;
    p.vehicles_per_lane = 1;
    p.lane_speeds_mps = {23.0};
    p.duration_ms = 10000;
    const auto events = generate_cam_stream(mob::gen_straight_highway(p, 1)[0]);
    for (std::size_t i = 1; i < events.size(); ++i) CHECK(events[i].ipt_ms == 200);
}

TEST_CASE("stationary vehicle: time trigger only, 1000 ms") {
    mob::StraightParams p;
    p.lanes = 1;
    p.vehicles_per_lane = 1;
    p.lane_speeds_mps = {0.0};
    p.duration_ms = 10000;
    const auto events = generate_cam_stream(mob::gen_straight_highway(p, 1)[0]);
    REQUIRE(events.size() == 11);
    for (std::size_t i = 1; i < events.size(); ++i) {
        CHECK(events[i].ipt_ms == 1000);
        CHECK(events[i].cause == TriggerCause::time);
    }
}

TEST_CASE("tight curve triggers on heading every 200 ms") {
    mob::CurvedParams p;
    p.lanes = 1;
    p.vehicles_per_lane = 1;
    p.radius_m = 180.0 / std::numbers::pi; // 20 deg/s at 20 m/s
    p.lane_speeds_mps = {20.0};
    p.duration_ms = 8000;
    const auto events = generate_cam_stream(mob::gen_curved_highway(p, 2)[0]);
    REQUIRE(events.size() > 5);
    for (std::size_t i = 1; i < events.size(); ++i) {
        CHECK(events[i].ipt_ms == 200);
        CHECK(events[i].cause == TriggerCause::heading);
    }
}

TEST_CASE("every generated IPT lies on the grid within [100, 1000]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto tr = random_walk_trace(0, 30000, seed);
        const auto events = generate_cam_stream(tr);
        for (std::size_t i = 1; i < events.size(); ++i) {
            CHECK(events[i].ipt_ms >= 100);
            CHECK(events[i].ipt_ms <= 1000);
            CHECK(events[i].ipt_ms % 100 == 0);
        }
    }
}

TEST_CASE("brute-force oracle matches generate_cam_stream on random traces") {
    for (std::uint64_t seed = 100; seed < 200; ++seed) {
        const auto tr = random_walk_trace(0, 20000, seed);
        const auto events = generate_cam_stream(tr);
        const auto expected = brute_force_cam_times(tr, {});
        REQUIRE(events.size() == expected.size());
        for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i].t == expected[i]);
    }
}

TEST_CASE("periodic stream is exact and validated") {
    mob::StraightParams p;
    p.lanes = 1;
    p.vehicles_per_lane = 1;
    p.duration_ms = 3000;
    const auto tr = mob::gen_straight_highway(p, 1)[0];
    const auto events = generate_periodic_stream(tr, 300);
    REQUIRE(events.size() == 11); // t = 0, 300, ..., 3000
    for (std::size_t i = 1; i < events.size(); ++i) CHECK(events[i].ipt_ms == 300);
    CHECK_THROWS_AS(generate_periodic_stream(tr, 250), ConfigError);
    CHECK_THROWS_AS(generate_periodic_stream(tr, 0), ConfigError);
    // 100 ms equals the maximum CAM rate
    CHECK(generate_periodic_stream(tr, 100).size() == 31);
}

TEST_CASE("mean_ipt_ms averages intervals across streams") {
    mob::StraightParams p;
    p.lanes = 1;
    p.vehicles_per_lane = 1;
    p.duration_ms = 4000;
    const auto tr = mob::gen_straight_highway(p, 1)[0];
    std::vector<std::vector<CamEvent>> streams{generate_periodic_stream(tr, 200),
                                               generate_periodic_stream(tr, 400)};
    const double mean = mean_ipt_ms(streams);
    // 20 intervals of 200 ms and 10 of 400 ms
    CHECK(mean == doctest::Approx((20.0 * 200 + 10.0 * 400) / 30.0));
}
