#include "kptrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kptrack/errors.hpp"

namespace kptrack {

namespace {

double clip(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

struct Affine2x2Inverse {
    double a11, a12, a21, a22;
    double det;
};

Affine2x2Inverse invert(const AffineTransform2D& tf) {
    double a = tf.A[0][0], b = tf.A[0][1], c = tf.A[1][0], d = tf.A[1][1];
    double det = a * d - b * c;
    double norm = std::sqrt(a * a + b * b + c * c + d * d);
    // Condition estimate via Frobenius norms of A and A^-1.
    if (det == 0.0 || norm * norm / std::abs(det) > 1e6)
        throw ValidationError("synthesize_keypoints: near-singular planted transform");
    return {d / det, -b / det, -c / det, a / det, det};
}

} // namespace

MotionPolicy motion_policy_from_string(const std::string& s) {
    if (s == "smoothed_random_walk") return MotionPolicy::SmoothedRandomWalk;
    if (s == "stationary") return MotionPolicy::Stationary;
    if (s == "constant_velocity") return MotionPolicy::ConstantVelocity;
    throw ValidationError("unknown motion policy '" + s + "'");
}

std::string to_string(MotionPolicy policy) {
    switch (policy) {
        case MotionPolicy::SmoothedRandomWalk: return "smoothed_random_walk";
        case MotionPolicy::Stationary: return "stationary";
        case MotionPolicy::ConstantVelocity: return "constant_velocity";
    }
    return "?";
}

DistractorPolicy distractor_policy_from_string(const std::string& s) {
    if (s == "stationary") return DistractorPolicy::Stationary;
    if (s == "random_walk") return DistractorPolicy::RandomWalk;
    throw ValidationError("unknown distractor policy '" + s + "'");
}

std::vector<PointTrajectory> generate_gt(const MotionConfig& config) {
    if (config.num_objects < 1 || config.steps < 2)
        throw ValidationError("generate_gt: need K >= 1 and T >= 2");
    if (config.step_std < 0.0)
        throw ValidationError("generate_gt: step_std must be nonnegative");
    const CoordinateBox& box = config.initial_range;
    if (box.min_u > box.max_u || box.min_v > box.max_v)
        throw ValidationError("generate_gt: empty coordinate box");

    std::mt19937_64 rng(static_cast<std::uint64_t>(config.seed));
    std::uniform_real_distribution<double> uni_u(box.min_u, box.max_u);
    std::uniform_real_distribution<double> uni_v(box.min_v, box.max_v);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<PointTrajectory> out(config.num_objects);
    for (auto& traj : out) {
        Point2 pos{uni_u(rng), uni_v(rng)};
        double vu = 0.0, vv = 0.0;
        if (config.policy == MotionPolicy::ConstantVelocity) {
            vu = gauss(rng) * config.step_std;
            vv = gauss(rng) * config.step_std;
        }
        traj.points.push_back(pos);
        for (std::size_t t = 1; t < config.steps; ++t) {
            switch (config.policy) {
                case MotionPolicy::Stationary:
                    break;
                case MotionPolicy::ConstantVelocity:
                    pos.u = clip(pos.u + vu, box.min_u, box.max_u);
                    pos.v = clip(pos.v + vv, box.min_v, box.max_v);
                    break;
                case MotionPolicy::SmoothedRandomWalk:
                    // Velocity random walk; positions integrate and clip.
                    vu += gauss(rng) * config.step_std;
                    vv += gauss(rng) * config.step_std;
                    pos.u = clip(pos.u + vu, box.min_u, box.max_u);
                    pos.v = clip(pos.v + vv, box.min_v, box.max_v);
                    break;
            }
            traj.points.push_back(pos);
        }
    }
    return out;
}

SynthesizedEpisode synthesize_keypoints(const std::vector<PointTrajectory>& ground_truth,
                                        const KeypointSynthConfig& config) {
    if (ground_truth.empty())
        throw ValidationError("synthesize_keypoints: no ground-truth trajectories");
    if (config.objects.size() != ground_truth.size())
        throw ValidationError("synthesize_keypoints: per-object config count != K");
    const std::size_t K = ground_truth.size();
    const std::size_t T = ground_truth.front().length();
    for (const auto& traj : ground_truth)
        if (traj.length() != T)
            throw ValidationError("synthesize_keypoints: ragged ground-truth lengths");

    std::mt19937_64 rng(static_cast<std::uint64_t>(config.seed));
    std::normal_distribution<double> gauss(0.0, 1.0);

    SynthesizedEpisode out;
    out.episode.ground_truth = ground_truth;
    for (std::size_t k = 0; k < K; ++k) {
        out.episode.object_names.push_back("object_" + std::to_string(k));
        out.true_association.push_back(k);
    }

    // Keypoint k observes object k through the inverse planted transform.
    for (std::size_t k = 0; k < K; ++k) {
        const ObjectSynth& synth = config.objects[k];
        if (synth.noise_std < 0.0)
            throw ValidationError("synthesize_keypoints: negative noise std");
        Affine2x2Inverse inv = invert(synth.true_transform);
        PointTrajectory traj;
        traj.points.reserve(T);
        for (const Point2& x : ground_truth[k].points) {
            double cu = x.u - synth.true_transform.b[0];
            double cv = x.v - synth.true_transform.b[1];
            Point2 z{inv.a11 * cu + inv.a12 * cv, inv.a21 * cu + inv.a22 * cv};
            if (synth.noise_std > 0.0) {
                z.u += gauss(rng) * synth.noise_std;
                z.v += gauss(rng) * synth.noise_std;
            }
            traj.points.push_back(z);
        }
        out.episode.keypoints.push_back(std::move(traj));
    }

    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (std::size_t d = 0; d < config.num_distractors; ++d) {
        PointTrajectory traj;
        Point2 pos{uni(rng), uni(rng)};
        traj.points.push_back(pos);
        for (std::size_t t = 1; t < T; ++t) {
            if (config.distractor_policy == DistractorPolicy::RandomWalk) {
                pos.u = clip(pos.u + gauss(rng) * config.distractor_step_std, -1.0, 1.0);
                pos.v = clip(pos.v + gauss(rng) * config.distractor_step_std, -1.0, 1.0);
            }
            traj.points.push_back(pos);
        }
        out.episode.keypoints.push_back(std::move(traj));
    }
    return out;
}

FeatureMapStack render_scene(const std::vector<Point2>& frame, const SceneRenderConfig& config) {
    if (config.height < 8 || config.width < 8)
        throw ValidationError("render_scene: resolution must be at least 8x8");
    if (!(config.blob_sigma > 0.0))
        throw ValidationError("render_scene: blob sigma must be positive");
    if (config.background_level < 0.0 || config.background_level > 1.0)
        throw ValidationError("render_scene: background level must be in [0, 1]");

    HeatmapConfig hm{config.blob_sigma, config.height, config.width};
    FeatureMapStack blobs = render_gaussian_heatmaps(frame, hm);
    const double bg = config.background_level;
    for (double& v : blobs.values) v = bg + (1.0 - bg) * v;
    return blobs;
}

} // namespace kptrack
