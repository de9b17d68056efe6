#pragma once

#include <array>
#include <vector>

#include "kptrack/trajectory.hpp"

namespace kptrack {

/// Time-invariant 2D affine map p -> A p + b fitted by ordinary least
/// squares. `degenerate` is set when the design matrix was rank-deficient
/// and the minimum-norm solution was returned instead.
struct AffineTransform2D {
    std::array<std::array<double, 2>, 2> A{{{1.0, 0.0}, {0.0, 1.0}}};
    std::array<double, 2> b{0.0, 0.0};
    bool degenerate = false;

    Point2 apply(const Point2& p) const {
        return {A[0][0] * p.u + A[0][1] * p.v + b[0],
                A[1][0] * p.u + A[1][1] * p.v + b[1]};
    }
};

struct FitDiagnostics {
    double residual_mse = 0.0; ///< mean over samples of squared residual norm
    int rank = 3;              ///< rank of the [u v 1] design matrix
    std::size_t num_samples = 0;
};

struct AffineFit {
    AffineTransform2D transform;
    FitDiagnostics diagnostics;
};

/// OLS fit of (A, b) minimizing sum_t ||A z^t + b - x^t||^2. Requires at
/// least 3 samples. Rank-deficient inputs (stationary or collinear source
/// points) yield the minimum-norm solution with degenerate = true.
AffineFit fit_affine(const std::vector<Point2>& source, const std::vector<Point2>& target);

AffineFit fit_affine(const PointTrajectory& source, const PointTrajectory& target);

PointTrajectory apply_affine(const AffineTransform2D& tf, const PointTrajectory& traj);

/// Per-(keypoint, object) fits over the concatenated frames of all given
/// episodes. Result is row-major N x K; fits run in parallel.
std::vector<std::vector<AffineFit>> fit_all_pairs(const std::vector<EpisodeTrajectories>& episodes);

} // namespace kptrack
