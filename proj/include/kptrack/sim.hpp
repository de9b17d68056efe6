#pragma once

#include <string>
#include <vector>

#include "kptrack/affine.hpp"
#include "kptrack/spatial.hpp"
#include "kptrack/trajectory.hpp"

namespace kptrack {

enum class MotionPolicy { SmoothedRandomWalk, Stationary, ConstantVelocity };

MotionPolicy motion_policy_from_string(const std::string& s);
std::string to_string(MotionPolicy policy);

/// Axis-aligned coordinate box; trajectories are clipped to it.
struct CoordinateBox {
    double min_u = -1.0, max_u = 1.0;
    double min_v = -1.0, max_v = 1.0;
};

struct MotionConfig {
    std::size_t num_objects = 1;
    std::size_t steps = 2;
    MotionPolicy policy = MotionPolicy::SmoothedRandomWalk;
    double step_std = 0.02; ///< per-step velocity increment std, normalized units
    CoordinateBox initial_range;
    long seed = 0;
};

enum class DistractorPolicy { Stationary, RandomWalk };

DistractorPolicy distractor_policy_from_string(const std::string& s);

/// Planted ground-truth relation for one object: the keypoint observing it
/// is z = A0^-1 (x - b0) + noise, so an OLS fit should recover (A0, b0).
struct ObjectSynth {
    AffineTransform2D true_transform; // the (A0, b0) a perfect fit recovers
    double noise_std = 0.0;
};

struct KeypointSynthConfig {
    std::vector<ObjectSynth> objects; // size K; index k pairs with ground truth k
    std::size_t num_distractors = 0;
    DistractorPolicy distractor_policy = DistractorPolicy::RandomWalk;
    double distractor_step_std = 0.05;
    long seed = 0;
};

struct SceneRenderConfig {
    std::size_t height = 64;
    std::size_t width = 64;
    double blob_sigma = 0.1;
    double background_level = 0.0;
};

/// Synthesized episode plus the true keypoint index for each object, for
/// checking association against the planted mapping.
struct SynthesizedEpisode {
    EpisodeTrajectories episode;
    std::vector<std::size_t> true_association; // size K
};

std::vector<PointTrajectory> generate_gt(const MotionConfig& config);

SynthesizedEpisode synthesize_keypoints(const std::vector<PointTrajectory>& ground_truth,
                                        const KeypointSynthConfig& config);

/// One channel per point: Gaussian blob over the background level.
FeatureMapStack render_scene(const std::vector<Point2>& frame, const SceneRenderConfig& config);

} // namespace kptrack
