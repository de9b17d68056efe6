#include <doctest.h>

#include <cmath>

#include "kptrack/errors.hpp"
#include "kptrack/metrics.hpp"
#include "kptrack/sim.hpp"
#include "kptrack/spatial.hpp"

using namespace kptrack;

TEST_CASE("generate_gt determinism and clipping") {
    MotionConfig cfg;
    cfg.num_objects = 3;
    cfg.steps = 50;
    cfg.step_std = 0.1;
    cfg.seed = 42;

    auto a = generate_gt(cfg);
    auto b = generate_gt(cfg);
    REQUIRE(a.size() == 3);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t t = 0; t < 50; ++t) {
            CHECK(a[k].points[t].u == b[k].points[t].u);
            CHECK(a[k].points[t].v == b[k].points[t].v);
            CHECK(a[k].points[t].u >= -1.0);
            CHECK(a[k].points[t].u <= 1.0);
            CHECK(a[k].points[t].v >= -1.0);
            CHECK(a[k].points[t].v <= 1.0);
        }
}

TEST_CASE("zero step_std random walk is stationary") {
    MotionConfig cfg;
    cfg.num_objects = 1;
    cfg.steps = 20;
    cfg.step_std = 0.0;
    cfg.seed = 7;
    auto trajs = generate_gt(cfg);
    for (const Point2& p : trajs[0].points) {
        CHECK(p.u == trajs[0].points[0].u);
        CHECK(p.v == trajs[0].points[0].v);
    }
}

TEST_CASE("stationary policy holds the initial point") {
    MotionConfig cfg;
    cfg.num_objects = 2;
    cfg.steps = 10;
    cfg.policy = MotionPolicy::Stationary;
    cfg.step_std = 0.5;
    cfg.seed = 9;
    for (const auto& traj : generate_gt(cfg))
        for (const Point2& p : traj.points) {
            CHECK(p.u == traj.points[0].u);
            CHECK(p.v == traj.points[0].v);
        }
}

TEST_CASE("identity transforms with zero noise reproduce the ground truth") {
    MotionConfig mc;
    mc.num_objects = 2;
    mc.steps = 40;
    mc.seed = 11;
    auto gt = generate_gt(mc);

    KeypointSynthConfig kc;
    kc.objects = {{AffineTransform2D{}, 0.0}, {AffineTransform2D{}, 0.0}};
    kc.seed = 12;
    SynthesizedEpisode synth = synthesize_keypoints(gt, kc);
    REQUIRE(synth.episode.num_keypoints() == 2);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t t = 0; t < 40; ++t) {
            CHECK(synth.episode.keypoints[k].points[t].u == doctest::Approx(gt[k].points[t].u));
            CHECK(synth.episode.keypoints[k].points[t].v == doctest::Approx(gt[k].points[t].v));
        }
}

TEST_CASE("planted transforms are recovered and association matches provenance") {
    MotionConfig mc;
    mc.num_objects = 2;
    mc.steps = 60;
    mc.step_std = 0.05;
    mc.seed = 21;
    auto gt = generate_gt(mc);

    AffineTransform2D tf0;
    tf0.A = {{{0.5, 0.0}, {0.0, 2.0}}};
    tf0.b = {0.1, 0.3};
    AffineTransform2D tf1;
    tf1.A = {{{1.3, -0.2}, {0.1, 0.7}}};
    tf1.b = {-0.2, 0.05};

    KeypointSynthConfig kc;
    kc.objects = {{tf0, 0.0}, {tf1, 0.0}};
    kc.num_distractors = 3;
    kc.seed = 22;
    SynthesizedEpisode synth = synthesize_keypoints(gt, kc);
    REQUIRE(synth.episode.num_keypoints() == 5);

    auto fits = fit_all_pairs({synth.episode});
    for (std::size_t k = 0; k < 2; ++k) {
        const AffineTransform2D& want = kc.objects[k].true_transform;
        const AffineTransform2D& got = fits[k][k].transform;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(std::abs(got.A[i][j] - want.A[i][j]) < 1e-8);
        CHECK(std::abs(got.b[0] - want.b[0]) < 1e-8);
        CHECK(std::abs(got.b[1] - want.b[1]) < 1e-8);
        CHECK(fits[k][k].diagnostics.residual_mse <= 1e-12);
    }

    ErrorMatrix errors = error_matrix({synth.episode}, fits, ErrorNormalization::Mean);
    CHECK(associate(errors) == synth.true_association);
}

TEST_CASE("singular planted transform is rejected") {
    MotionConfig mc;
    mc.num_objects = 1;
    mc.steps = 10;
    mc.seed = 1;
    auto gt = generate_gt(mc);
    AffineTransform2D singular;
    singular.A = {{{1.0, 1.0}, {1.0, 1.0}}};
    KeypointSynthConfig kc;
    kc.objects = {{singular, 0.0}};
    CHECK_THROWS_AS(synthesize_keypoints(gt, kc), ValidationError);
}

TEST_CASE("observation noise shows up as the analytic error floor") {
    const double noise_std = 0.005;
    double total = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        MotionConfig mc;
        mc.num_objects = 1;
        mc.steps = 500;
        mc.step_std = 0.02;
        mc.seed = 100 + s;
        auto gt = generate_gt(mc);
        KeypointSynthConfig kc;
        kc.objects = {{AffineTransform2D{}, noise_std}};
        kc.seed = 200 + s;
        SynthesizedEpisode synth = synthesize_keypoints(gt, kc);
        auto fits = fit_all_pairs({synth.episode});
        ErrorMatrix errors = error_matrix({synth.episode}, fits, ErrorNormalization::Mean);
        total += errors.at(0, 0);
    }
    double mean_err = total / seeds;
    double expected = 2.0 * noise_std * noise_std;
    CHECK(mean_err > 0.8 * expected);
    CHECK(mean_err < 1.2 * expected);
}

TEST_CASE("mean tracking error is non-decreasing in noise std") {
    std::vector<double> noise_levels = {0.0, 0.002, 0.005, 0.01};
    std::vector<double> mean_errors;
    for (double noise : noise_levels) {
        double total = 0.0;
        for (int s = 0; s < 20; ++s) {
            MotionConfig mc;
            mc.num_objects = 1;
            mc.steps = 100;
            mc.step_std = 0.02;
            mc.seed = 300 + s;
            auto gt = generate_gt(mc);
            KeypointSynthConfig kc;
            kc.objects = {{AffineTransform2D{}, noise}};
            kc.seed = 400 + s;
            SynthesizedEpisode synth = synthesize_keypoints(gt, kc);
            auto fits = fit_all_pairs({synth.episode});
            total += error_matrix({synth.episode}, fits, ErrorNormalization::Mean).at(0, 0);
        }
        mean_errors.push_back(total / 20.0);
    }
    for (std::size_t i = 1; i < mean_errors.size(); ++i)
        CHECK(mean_errors[i] >= mean_errors[i - 1]);
}

TEST_CASE("render_scene round trips through soft_argmax") {
    SceneRenderConfig cfg;
    cfg.background_level = 0.05;
    std::vector<Point2> frame = {{0.4, -0.3}, {-0.7, 0.6}};
    FeatureMapStack scene = render_scene(frame, cfg);
    REQUIRE(scene.channels == 2);
    std::vector<Point2> rec = soft_argmax(scene, {0.05});
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(std::abs(rec[k].u - frame[k].u) <= 1.0 / 64.0);
        CHECK(std::abs(rec[k].v - frame[k].v) <= 1.0 / 64.0);
    }

    // bitwise-deterministic
    FeatureMapStack again = render_scene(frame, cfg);
    CHECK(scene.values == again.values);
}

TEST_CASE("render_scene with zero background peaks at the object pixel") {
    SceneRenderConfig cfg;
    cfg.height = 33;
    cfg.width = 33;
    FeatureMapStack scene = render_scene({{0.0, 0.0}}, cfg);
    double center = scene.at(16, 16, 0);
    for (double v : scene.values) CHECK(v <= center);
    CHECK(center == doctest::Approx(1.0));
}
