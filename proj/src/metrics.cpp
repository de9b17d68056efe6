#include "kptrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "kptrack/errors.hpp"

namespace kptrack {

std::string to_string(ErrorNormalization norm) {
    return norm == ErrorNormalization::Sum ? "sum" : "mean";
}

ErrorNormalization normalization_from_string(const std::string& s) {
    if (s == "sum") return ErrorNormalization::Sum;
    if (s == "mean") return ErrorNormalization::Mean;
    throw ValidationError("unknown normalization '" + s + "' (expected 'sum' or 'mean')");
}

double ThresholdConfig::require(const std::string& object_name) const {
    auto it = per_object.find(object_name);
    if (it == per_object.end())
        throw ValidationError("no threshold configured for object '" + object_name + "'");
    if (!(it->second > 0.0))
        throw ValidationError("threshold for object '" + object_name + "' must be positive");
    return it->second;
}

double tracking_error(const PointTrajectory& aligned, const PointTrajectory& target,
                      ErrorNormalization norm) {
    if (aligned.length() != target.length())
        throw ValidationError("tracking_error: trajectory lengths differ");
    if (aligned.length() == 0)
        throw ValidationError("tracking_error: empty trajectories");
    double sum = 0.0;
    for (std::size_t t = 0; t < aligned.length(); ++t) {
        double du = aligned.points[t].u - target.points[t].u;
        double dv = aligned.points[t].v - target.points[t].v;
        sum += du * du + dv * dv;
    }
    if (norm == ErrorNormalization::Mean)
        sum /= static_cast<double>(aligned.length());
    return sum;
}

ErrorMatrix error_matrix(const std::vector<EpisodeTrajectories>& episodes,
                         const std::vector<std::vector<AffineFit>>& transforms,
                         ErrorNormalization norm) {
    if (episodes.empty())
        throw ValidationError("error_matrix: no episodes");
    const std::size_t N = episodes.front().num_keypoints();
    const std::size_t K = episodes.front().num_objects();
    if (transforms.size() != N || (N > 0 && transforms.front().size() != K))
        throw ValidationError("error_matrix: transform matrix shape does not match N x K");

    ErrorMatrix out;
    out.num_keypoints = N;
    out.num_objects = K;
    out.normalization = norm;
    out.values.assign(N * K, 0.0);

    std::size_t total_frames = 0;
    for (const auto& ep : episodes) {
        if (ep.num_keypoints() != N || ep.num_objects() != K)
            throw ValidationError("error_matrix: episodes disagree on N or K");
        total_frames += ep.num_steps();
    }

    for (const auto& ep : episodes) {
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t k = 0; k < K; ++k) {
                const AffineTransform2D& tf = transforms[n][k].transform;
                const auto& z = ep.keypoints[n].points;
                const auto& x = ep.ground_truth[k].points;
                double acc = 0.0;
                for (std::size_t t = 0; t < z.size(); ++t) {
                    Point2 zh = tf.apply(z[t]);
                    double du = zh.u - x[t].u;
                    double dv = zh.v - x[t].v;
                    acc += du * du + dv * dv;
                }
                out.at(n, k) += acc;
            }
        }
    }
    if (norm == ErrorNormalization::Mean)
        for (double& v : out.values) v /= static_cast<double>(total_frames);
    return out;
}

std::vector<std::size_t> associate(const ErrorMatrix& errors) {
    if (errors.num_keypoints == 0)
        throw ValidationError("associate: empty error matrix");
    std::vector<std::size_t> best(errors.num_objects, 0);
    for (std::size_t k = 0; k < errors.num_objects; ++k) {
        double best_err = errors.at(0, k);
        for (std::size_t n = 1; n < errors.num_keypoints; ++n) {
            if (errors.at(n, k) < best_err) { // strict: ties keep the lowest index
                best_err = errors.at(n, k);
                best[k] = n;
            }
        }
    }
    return best;
}

TrackingReport tracking_report(const ErrorMatrix& errors,
                               const std::vector<std::size_t>& association,
                               const std::vector<std::string>& object_names,
                               const ThresholdConfig& thresholds) {
    const std::size_t K = errors.num_objects;
    if (association.size() != K || object_names.size() != K)
        throw ValidationError("tracking_report: association/object_names size mismatch");

    TrackingReport report;
    report.normalization = errors.normalization;
    std::map<std::size_t, std::size_t> keypoint_uses;
    for (std::size_t k = 0; k < K; ++k) {
        ObjectResult res;
        res.object_name = object_names[k];
        res.best_keypoint = association[k];
        res.error = errors.at(association[k], k);
        res.threshold = thresholds.require(object_names[k]);
        res.tracked = res.error <= res.threshold; // boundary counts as tracked
        if (res.tracked) report.tracked_set.push_back(k);
        keypoint_uses[res.best_keypoint]++;
        report.objects.push_back(std::move(res));
    }
    for (const auto& [n, uses] : keypoint_uses)
        if (uses > 1) report.shared_keypoints.push_back(n);
    report.tracking_capability =
        static_cast<double>(report.tracked_set.size()) / static_cast<double>(K);
    return report;
}

AggregateReport aggregate_runs(const std::vector<TrackingReport>& reports) {
    if (reports.empty())
        throw ValidationError("aggregate_runs: no reports");
    const std::size_t K = reports.front().objects.size();
    for (const auto& r : reports) {
        if (r.objects.size() != K)
            throw ValidationError("aggregate_runs: object count differs between reports");
        for (std::size_t k = 0; k < K; ++k)
            if (r.objects[k].object_name != reports.front().objects[k].object_name)
                throw ValidationError("aggregate_runs: object names differ between reports");
    }

    const std::size_t R = reports.size();
    AggregateReport agg;
    agg.num_runs = R;
    for (std::size_t k = 0; k < K; ++k) {
        ObjectAggregate oa;
        oa.object_name = reports.front().objects[k].object_name;
        std::vector<double> errs;
        errs.reserve(R);
        std::size_t tracked_runs = 0;
        for (const auto& r : reports) {
            errs.push_back(r.objects[k].error);
            if (r.objects[k].tracked) ++tracked_runs;
        }
        double mean = 0.0;
        for (double e : errs) mean += e;
        mean /= static_cast<double>(R);
        oa.error_mean = mean;

        std::sort(errs.begin(), errs.end());
        oa.error_median = (R % 2 == 1)
                              ? errs[R / 2]
                              : 0.5 * (errs[R / 2 - 1] + errs[R / 2]);

        if (R > 1) {
            double ss = 0.0;
            for (double e : errs) ss += (e - mean) * (e - mean);
            oa.error_variance = ss / static_cast<double>(R - 1);
            oa.variance_defined = true;
        }
        oa.tracking_capability = static_cast<double>(tracked_runs) / static_cast<double>(R);
        agg.objects.push_back(std::move(oa));
    }

    double tc_sum = 0.0;
    for (const auto& r : reports) tc_sum += r.tracking_capability;
    agg.mean_tracking_capability = tc_sum / static_cast<double>(R);
    return agg;
}

double velocity_consistency(const PointTrajectory& traj, const VelocityConfig& cfg) {
    if (cfg.beta < 0.0)
        throw ValidationError("velocity_consistency: beta must be nonnegative");
    const std::size_t T = traj.length();
    if (T < 3)
        throw ValidationError("velocity_consistency: need T >= 3, got " + std::to_string(T));
    double sum = 0.0;
    for (std::size_t t = 1; t + 1 < T; ++t) {
        double au = traj.points[t + 1].u - 2.0 * traj.points[t].u + traj.points[t - 1].u;
        double av = traj.points[t + 1].v - 2.0 * traj.points[t].v + traj.points[t - 1].v;
        sum += au * au + av * av;
    }
    return cfg.beta * sum / static_cast<double>(T - 2);
}

} // namespace kptrack
