#pragma once

#include <map>
#include <string>
#include <vector>

#include "kptrack/affine.hpp"
#include "kptrack/trajectory.hpp"

namespace kptrack {

enum class ErrorNormalization {
    Sum, ///< literal accumulated squared distance over frames
    Mean ///< divided by frame count; length-invariant (default)
};

std::string to_string(ErrorNormalization norm);
ErrorNormalization normalization_from_string(const std::string& s);

/// N x K matrix of tracking errors between aligned keypoint trajectories
/// and ground-truth trajectories.
struct ErrorMatrix {
    std::size_t num_keypoints = 0;
    std::size_t num_objects = 0;
    std::vector<double> values; // row-major N x K
    ErrorNormalization normalization = ErrorNormalization::Mean;

    double& at(std::size_t n, std::size_t k) { return values[n * num_objects + k]; }
    double at(std::size_t n, std::size_t k) const { return values[n * num_objects + k]; }
};

/// Per-object-name error thresholds. Units are squared normalized
/// coordinates under the configured normalization mode.
struct ThresholdConfig {
    std::map<std::string, double> per_object;

    double require(const std::string& object_name) const;
};

struct ObjectResult {
    std::string object_name;
    std::size_t best_keypoint = 0;
    double error = 0.0;
    double threshold = 0.0;
    bool tracked = false;
    bool degenerate_fit = false;
};

struct TrackingReport {
    std::string run_id;
    int epoch = 0;
    std::vector<ObjectResult> objects;         // indexed by k
    std::vector<std::size_t> tracked_set;      // indices of tracked objects
    double tracking_capability = 0.0;          // |tracked_set| / K
    ErrorNormalization normalization = ErrorNormalization::Mean;
    /// Keypoints that are the best match for more than one object.
    std::vector<std::size_t> shared_keypoints;
};

struct ObjectAggregate {
    std::string object_name;
    double error_mean = 0.0;
    double error_median = 0.0;
    double error_variance = 0.0; ///< unbiased (divisor R-1); 0 for a single run
    bool variance_defined = false;
    double tracking_capability = 0.0; ///< fraction of runs with this object tracked
};

struct AggregateReport {
    std::vector<ObjectAggregate> objects;
    double mean_tracking_capability = 0.0; ///< mean of per-run TC
    std::size_t num_runs = 0;
};

struct VelocityConfig {
    double beta = 0.1;
};

/// Accumulated squared distance between two equal-length trajectories;
/// Mean mode divides by the number of frames.
double tracking_error(const PointTrajectory& aligned, const PointTrajectory& target,
                      ErrorNormalization norm);

/// Entry (n, k): error between keypoint n aligned by transforms[n][k] and
/// object k, accumulated over the concatenated frames of all episodes.
ErrorMatrix error_matrix(const std::vector<EpisodeTrajectories>& episodes,
                         const std::vector<std::vector<AffineFit>>& transforms,
                         ErrorNormalization norm);

/// Per-object argmin over keypoints; ties break to the lowest index. The
/// same keypoint may serve multiple objects.
std::vector<std::size_t> associate(const ErrorMatrix& errors);

TrackingReport tracking_report(const ErrorMatrix& errors,
                               const std::vector<std::size_t>& association,
                               const std::vector<std::string>& object_names,
                               const ThresholdConfig& thresholds);

AggregateReport aggregate_runs(const std::vector<TrackingReport>& reports);

/// Temporal-smoothness diagnostic: beta times the mean squared second
/// difference of the trajectory. Zero for constant-velocity motion.
double velocity_consistency(const PointTrajectory& traj, const VelocityConfig& cfg);

} // namespace kptrack
