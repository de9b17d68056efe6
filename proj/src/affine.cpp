#include "kptrack/affine.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "kptrack/errors.hpp"
#include "kptrack/parallel.hpp"

namespace kptrack {

namespace {

constexpr double kRankTolerance = 1e-10; // relative to the largest singular value

} // namespace

AffineFit fit_affine(const std::vector<Point2>& source, const std::vector<Point2>& target) {
    if (source.size() != target.size())
        throw ValidationError("fit_affine: source and target lengths differ");
    const std::size_t T = source.size();
    if (T < 3)
        throw ValidationError("fit_affine: need at least 3 samples, got " + std::to_string(T));
    for (std::size_t t = 0; t < T; ++t) {
        if (!std::isfinite(source[t].u) || !std::isfinite(source[t].v) ||
            !std::isfinite(target[t].u) || !std::isfinite(target[t].v))
            throw ValidationError("fit_affine: non-finite input at sample " + std::to_string(t));
    }

    // The 2x2+2 system decouples into two 3-parameter OLS problems sharing
    // the [u v 1] design matrix; min-norm per coordinate is min-norm overall.
    Eigen::MatrixXd design(T, 3);
    Eigen::MatrixXd rhs(T, 2);
    for (std::size_t t = 0; t < T; ++t) {
        design(t, 0) = source[t].u;
        design(t, 1) = source[t].v;
        design(t, 2) = 1.0;
        rhs(t, 0) = target[t].u;
        rhs(t, 1) = target[t].v;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    double tol = sv.size() > 0 ? sv(0) * kRankTolerance : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;

    // Minimum-norm least squares via truncated pseudoinverse.
    Eigen::MatrixXd params(3, 2); // columns: output u, output v
    {
        Eigen::MatrixXd ut_rhs = svd.matrixU().transpose() * rhs;
        Eigen::MatrixXd scaled = Eigen::MatrixXd::Zero(3, 2);
        for (int i = 0; i < rank; ++i) scaled.row(i) = ut_rhs.row(i) / sv(i);
        params = svd.matrixV() * scaled;
    }

    AffineFit fit;
    fit.transform.A = {{{params(0, 0), params(1, 0)}, {params(0, 1), params(1, 1)}}};
    fit.transform.b = {params(2, 0), params(2, 1)};
    fit.transform.degenerate = rank < 3;

    Eigen::MatrixXd residual = design * params - rhs;
    fit.diagnostics.residual_mse = residual.squaredNorm() / static_cast<double>(T);
    fit.diagnostics.rank = rank;
    fit.diagnostics.num_samples = T;
    return fit;
}

AffineFit fit_affine(const PointTrajectory& source, const PointTrajectory& target) {
    return fit_affine(source.points, target.points);
}

PointTrajectory apply_affine(const AffineTransform2D& tf, const PointTrajectory& traj) {
    PointTrajectory out;
    out.points.reserve(traj.points.size());
    for (const Point2& p : traj.points) out.points.push_back(tf.apply(p));
    return out;
}

std::vector<std::vector<AffineFit>> fit_all_pairs(const std::vector<EpisodeTrajectories>& episodes) {
    if (episodes.empty())
        throw ValidationError("fit_all_pairs: no episodes");
    const std::size_t N = episodes.front().num_keypoints();
    const std::size_t K = episodes.front().num_objects();
    for (const auto& ep : episodes)
        if (ep.num_keypoints() != N || ep.num_objects() != K)
            throw ValidationError("fit_all_pairs: episodes disagree on N or K");

    // Concatenate frames across episodes; frames are weighted equally.
    std::vector<std::vector<Point2>> keypoint_samples(N);
    std::vector<std::vector<Point2>> object_samples(K);
    for (const auto& ep : episodes) {
        for (std::size_t n = 0; n < N; ++n)
            keypoint_samples[n].insert(keypoint_samples[n].end(),
                                       ep.keypoints[n].points.begin(), ep.keypoints[n].points.end());
        for (std::size_t k = 0; k < K; ++k)
            object_samples[k].insert(object_samples[k].end(),
                                     ep.ground_truth[k].points.begin(), ep.ground_truth[k].points.end());
    }

    std::vector<std::vector<AffineFit>> fits(N, std::vector<AffineFit>(K));
    parallel_for(N * K, [&](std::size_t idx) {
        std::size_t n = idx / K;
        std::size_t k = idx % K;
        fits[n][k] = fit_affine(keypoint_samples[n], object_samples[k]);
    });
    return fits;
}

} // namespace kptrack
