#pragma once

#include <cstddef>
#include <vector>

#include "kptrack/trajectory.hpp"

namespace kptrack {

/// H x W x N stack of activation maps, stored channel-major: channel n is a
/// contiguous row-major H x W block.
struct FeatureMapStack {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<double> values; // size H * W * N

    double& at(std::size_t h, std::size_t w, std::size_t n) {
        return values[(n * height + h) * width + w];
    }
    double at(std::size_t h, std::size_t w, std::size_t n) const {
        return values[(n * height + h) * width + w];
    }
};

struct SoftmaxConfig {
    double alpha = 1.0; ///< temperature; smaller concentrates mass at the maximum
};

struct HeatmapConfig {
    double sigma = 0.1; ///< Gaussian std in normalized coordinates
    std::size_t height = 64;
    std::size_t width = 64;
};

/// Dense image with values in [0, 1], layout matching FeatureMapStack.
struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<double> values;
};

/// Maps a pixel index to the normalized coordinate in [-1, 1]: index 0 maps
/// to -1 and index dim-1 to +1. A single-pixel axis maps to 0.
double pixel_to_norm(std::size_t index, std::size_t dim);

/// Channel-wise softmax with temperature, max-stabilized so any finite
/// input is accepted. Each output channel sums to 1.
FeatureMapStack channel_softmax(const FeatureMapStack& maps, const SoftmaxConfig& cfg);

/// Expected grid coordinate under the channel-wise softmax, per channel.
/// Coordinate convention: u = normalized column, v = normalized row.
std::vector<Point2> soft_argmax(const FeatureMapStack& maps, const SoftmaxConfig& cfg);

/// One channel per point: exp(-d^2 / (2 sigma^2)) with d the
/// normalized-coordinate distance to the point. Truncated at the image
/// boundary without renormalization.
FeatureMapStack render_gaussian_heatmaps(const std::vector<Point2>& points,
                                         const HeatmapConfig& cfg);

/// Mean of squared per-element differences (resolution-independent).
double reconstruction_mse(const Image& a, const Image& b);

} // namespace kptrack
