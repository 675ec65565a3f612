#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "v2xsim/harness/predict_eval.hpp"
#include "v2xsim/mobility/generators.hpp"
#include "v2xsim/predictor/gru_predictor.hpp"
#include "v2xsim/predictor/predictor.hpp"

using namespace v2x;
using namespace v2x::pred;

TEST_CASE("map_ipt_to_rri picks the nearest, ties round up") {
    const std::vector<int> grid{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
    CHECK(map_ipt_to_rri(174, grid) == 200);
    CHECK(map_ipt_to_rri(300, grid) == 300);
    CHECK(map_ipt_to_rri(150, grid) == 200); // exact midpoint: longer wins
    CHECK(map_ipt_to_rri(149.999, grid) == 100);
    CHECK(map_ipt_to_rri(5000, grid) == 1000);
    CHECK(map_ipt_to_rri(1, grid) == 100);
    CHECK_THROWS_AS(map_ipt_to_rri(100, {}), ConfigError);
}

TEST_CASE("heading reconstruction from sine/cosine round trips") {
    for (double theta : {0.0, 0.0001, 45.0, 90.0, 179.9999, 180.0, 270.0, 359.9999}) {
        const double r = mob::deg2rad(theta);
        const double back = mob::dir_to_heading(std::cos(r), std::sin(r));
        CHECK(mob::heading_diff(back, theta) < 1e-9);
    }
}

TEST_CASE("kinematic history warms at capacity and keeps the unit circle") {
    KinematicHistory h(10);
    CHECK_FALSE(h.warm());
    for (int i = 0; i < 25; ++i)
        h.push(mob::Kinematics{i * 100, 0, 0, 12.0, mob::normalize_heading(i * 37.0)});
    CHECK(h.warm());
    CHECK(h.size() == 10);
    std::vector<double> feat(30);
    h.write_features(feat.data(), 50.0);
    for (int k = 0; k < 10; ++k) {
        CHECK(feat[k * 3] == doctest::Approx(12.0 / 50.0));
        const double s = feat[k * 3 + 1], c = feat[k * 3 + 2];
        CHECK(s * s + c * c == doctest::Approx(1.0).epsilon(1e-9));
    }
    // oldest-first: the first row corresponds to i = 15
    const double r15 = mob::deg2rad(mob::normalize_heading(15 * 37.0));
    CHECK(feat[1] == doctest::Approx(std::sin(r15)));
}

namespace {

std::array<std::array<double, 3>, 10> constant_motion(double speed, double heading_deg) {
    std::array<std::array<double, 3>, 10> traj;
    const double r = mob::deg2rad(heading_deg);
    for (int k = 0; k < 10; ++k) traj[k] = {speed, std::sin(r), std::cos(r)};
    return traj;
}

} // namespace

TEST_CASE("trajectory walk: constant 20 m/s fires the position trigger at 200 ms") {
    cam::CamState ref;
    ref.last_tx = {0, 0, 0, 20.0, 0.0};
    ref.last_tx_time = 0;
    const auto walk = walk_predicted_trajectory(ref, constant_motion(20.0, 0.0));
    CHECK(walk.ipt_ms == 200);
    CHECK(walk.cause == cam::TriggerCause::position);
}

TEST_CASE("trajectory walk: rotating heading fires the heading trigger") {
    cam::CamState ref;
    ref.last_tx = {0, 0, 0, 1.0, 0.0};
    ref.last_tx_time = 0;
    std::array<std::array<double, 3>, 10> traj;
    for (int k = 0; k < 10; ++k) {
        const double heading = 2.5 * (k + 1); // 2.5 deg per 100 ms
        const double r = mob::deg2rad(heading);
        traj[k] = {1.0, std::sin(r), std::cos(r)};
    }
    const auto walk = walk_predicted_trajectory(ref, traj);
    CHECK(walk.ipt_ms == 200); // 5.0 deg at step 2
    CHECK(walk.cause == cam::TriggerCause::heading);
}

TEST_CASE("trajectory walk: no motion falls through to the time trigger") {
    cam::CamState ref;
    ref.last_tx = {0, 0, 0, 0.0, 0.0};
    ref.last_tx_time = 0;
    const auto walk = walk_predicted_trajectory(ref, constant_motion(0.0, 0.0));
    CHECK(walk.ipt_ms == 1000);
    CHECK(walk.cause == cam::TriggerCause::time);
}

TEST_CASE("walking the true future trajectory reproduces the true IPT") {
    // Shared-code-path property: the walk is the cam trigger function.
    mob::CurvedParams p;
    p.lanes = 2;
    p.vehicles_per_lane = 2;
    p.radius_m = 100.0;
    p.lane_speeds_mps = {18.0, 26.0};
    p.duration_ms = 40000;
    const auto traces = mob::gen_curved_highway(p, 11);
    int checked = 0;
    for (const auto& tr : traces) {
        const auto stream = cam::generate_cam_stream(tr);
        for (std::size_t k = 0; k + 1 < stream.size(); ++k) {
            const SimTime t0 = stream[k].t;
            const std::size_t s0 = static_cast<std::size_t>(t0 / kGridMs);
            if (s0 + 10 >= tr.samples.size()) break;
            cam::CamState ref;
            ref.last_tx = tr.samples[s0];
            ref.last_tx_time = t0;
            std::array<std::array<double, 3>, 10> traj;
            for (int j = 0; j < 10; ++j) {
                const auto& kin = tr.samples[s0 + 1 + static_cast<std::size_t>(j)];
                const double r = mob::deg2rad(kin.heading);
                traj[j] = {kin.speed, std::sin(r), std::cos(r)};
            }
            const auto walk = walk_predicted_trajectory(ref, traj);
            CHECK(walk.ipt_ms == stream[k + 1].t - stream[k].t);
            ++checked;
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("oracle predictor returns the exact next IPT") {
    mob::StraightParams p;
    p.lanes = 1;
    p.vehicles_per_lane = 1;
    p.lane_speeds_mps = {23.0};
    p.duration_ms = 5000;
    const auto traces = mob::gen_straight_highway(p, 1);
    auto streams = std::make_shared<std::vector<std::vector<cam::CamEvent>>>();
    streams->push_back(cam::generate_cam_stream(traces[0]));

    OraclePredictor oracle(streams);
    const auto& s = (*streams)[0];
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        cam::CamState ref;
        const auto pr = oracle.predict(0, s[k].t, k, ref);
        CHECK(pr.predicted_ipt_ms == s[k + 1].t - s[k].t);
        CHECK_FALSE(pr.cold);
    }
    // last CAM: ceiling fallback
    CHECK(oracle.predict(0, s.back().t, s.size() - 1, {}).predicted_ipt_ms == 1000);
}

TEST_CASE("periodic and mean-ipt predictors are constant") {
    PeriodicPredictor per(300);
    CHECK(per.predict(0, 0, 0, {}).predicted_ipt_ms == 300);
    CHECK(per.base_rri_ms(100) == 300);

    MeanIptPredictor mean(301.0, {100, 200, 300, 400});
    CHECK(mean.predict(0, 0, 0, {}).predicted_ipt_ms == 300);
    CHECK(mean.base_rri_ms(100) == 300);
}

TEST_CASE("windowed gru_predict falls back to the ceiling when cold") {
    GruTriple models;
    models.speed = nn::make_speed_model(3, 4, 10);
    models.sine = nn::make_sine_model(3, 4, 10);
    models.cosine = nn::make_cosine_model(3, 4, 10);
    KinematicHistory h(600); // never filled
    cam::CamState ref;
    const auto p = gru_predict(h, models, ref);
    CHECK(p.cold);
    CHECK(p.predicted_ipt_ms == 1000);
}

TEST_CASE("streaming predictor matches the windowed forward after warmup") {
    auto models = std::make_shared<GruTriple>();
    models->speed = nn::make_speed_model(3, 6, 10);
    models->sine = nn::make_sine_model(3, 6, 10);
    models->cosine = nn::make_cosine_model(3, 6, 10);
    RngStream r1(3), r2(4), r3(5);
    models->speed.init(r1);
    models->sine.init(r2);
    models->cosine.init(r3);

    mob::CurvedParams p;
    p.lanes = 1;
    p.vehicles_per_lane = 1;
    p.radius_m = 150.0;
    p.lane_speeds_mps = {20.0};
    p.duration_ms = 70000;
    const auto tr = mob::gen_curved_highway(p, 7)[0];

    GruStreamingPredictor streaming(models, 1, {}, 600);
    KinematicHistory hist(600);
    // advance both over exactly 600 samples: identical information
    for (std::size_t s = 0; s < 600; ++s) {
        streaming.observe(0, tr.samples[s]);
        streaming.flush();
        hist.push(tr.samples[s]);
    }
    cam::CamState ref;
    ref.last_tx = tr.samples[599];
    ref.last_tx_time = tr.samples[599].t;
    const auto a = streaming.predict(0, tr.samples[599].t, 0, ref);
    const auto b = gru_predict(hist, *models, ref);
    CHECK_FALSE(a.cold);
    CHECK_FALSE(b.cold);
    CHECK(a.predicted_ipt_ms == b.predicted_ipt_ms);
    for (int k = 0; k < 10; ++k)
        for (int f = 0; f < 3; ++f)
            CHECK(a.trajectory[k][f] == doctest::Approx(b.trajectory[k][f]).epsilon(1e-12));
}

TEST_CASE("oracle_eval produces a perfect diagonal") {
    mob::CurvedParams p;
    p.lanes = 2;
    p.vehicles_per_lane = 2;
    p.radius_m = 100.0;
    p.lane_speeds_mps = {13.0, 25.0};
    p.duration_ms = 30000;
    const auto traces = mob::gen_curved_highway(p, 9);
    const auto res = harness::oracle_eval(traces);
    CHECK(res.confusion.total > 0);
    CHECK(res.confusion.accuracy() == 1.0);
    CHECK(res.stats.error_ms.mean == 0.0);
    CHECK(res.stats.error_ms.std_dev == 0.0);
}
