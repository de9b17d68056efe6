#pragma once

#include <string>
#include <vector>

namespace kptrack {

/// 2D point in normalized image coordinates. The canonical domain is
/// [-1, 1] per axis; values outside are allowed (transformed keypoints may
/// leave the domain) and only flagged by validation.
struct Point2 {
    double u = 0.0; ///< normalized column coordinate
    double v = 0.0; ///< normalized row coordinate
};

/// Ordered sequence of points, one per time step.
struct PointTrajectory {
    std::vector<Point2> points;

    std::size_t length() const { return points.size(); }
};

/// Paired keypoint (N) and ground-truth (K) trajectory sets for one episode.
/// All trajectories share the same length T.
struct EpisodeTrajectories {
    std::string episode_id;
    std::vector<PointTrajectory> keypoints;    // size N
    std::vector<PointTrajectory> ground_truth; // size K
    std::vector<std::string> object_names;     // size K

    std::size_t num_keypoints() const { return keypoints.size(); }
    std::size_t num_objects() const { return ground_truth.size(); }
    std::size_t num_steps() const {
        return ground_truth.empty() ? 0 : ground_truth.front().length();
    }
};

/// One epoch snapshot inside a run: the evaluation episodes recorded at
/// that point of training.
struct EpochSnapshot {
    int epoch = 0;
    std::vector<EpisodeTrajectories> episodes;
};

/// A full training run: seed plus per-epoch snapshots with identical
/// N, K, T, and object names.
struct RunRecord {
    std::string run_id;
    long seed = 0;
    std::vector<EpochSnapshot> snapshots;
};

/// Manifest entry pointing at episode files on disk, one per snapshot.
struct RunManifest {
    std::string run_id;
    long seed = 0;
    struct Snapshot {
        int epoch = 0;
        std::vector<std::string> episode_paths; // relative to the manifest
    };
    std::vector<Snapshot> snapshots;
};

/// Disjoint train/validation/test partition of sequence identifiers.
struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
};

/// Throws ValidationError if the episode violates its invariants
/// (empty sets, ragged lengths, non-finite values, duplicate names).
void validate_episode(const EpisodeTrajectories& episode);

/// True iff every coordinate lies in [-1, 1]. Out-of-domain points are
/// legal; callers use this to emit warnings.
bool episode_in_domain(const EpisodeTrajectories& episode);

EpisodeTrajectories load_episode(const std::string& path);
void save_episode(const EpisodeTrajectories& episode, const std::string& path);

RunManifest load_run_manifest(const std::string& path);
void save_run_manifest(const RunManifest& manifest, const std::string& path);

/// Loads a manifest and every episode file it references.
RunRecord load_run(const std::string& manifest_path);

/// Deterministic shuffle-then-cut split. Ratios must be nonnegative and sum
/// to 1 within 1e-9; sizes match the ratios to within one sequence.
DatasetSplit split_sequences(const std::vector<std::string>& sequence_ids,
                             double r_train, double r_val, double r_test,
                             long seed);

} // namespace kptrack
