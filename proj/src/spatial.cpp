#include "kptrack/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kptrack/errors.hpp"

namespace kptrack {

namespace {

void validate_stack(const FeatureMapStack& maps) {
    if (maps.height < 1 || maps.width < 1 || maps.channels < 1)
        throw ValidationError("feature map stack: all dimensions must be >= 1");
    if (maps.values.size() != maps.height * maps.width * maps.channels)
        throw ValidationError("feature map stack: value count does not match H*W*N");
    for (double v : maps.values)
        if (!std::isfinite(v))
            throw ValidationError("feature map stack: non-finite value");
}

} // namespace

double pixel_to_norm(std::size_t index, std::size_t dim) {
    if (dim <= 1) return 0.0;
    return -1.0 + 2.0 * static_cast<double>(index) / static_cast<double>(dim - 1);
}

FeatureMapStack channel_softmax(const FeatureMapStack& maps, const SoftmaxConfig& cfg) {
    validate_stack(maps);
    if (!(cfg.alpha > 0.0))
        throw ValidationError("softmax: alpha must be positive");

    FeatureMapStack out;
    out.height = maps.height;
    out.width = maps.width;
    out.channels = maps.channels;
    out.values.resize(maps.values.size());

    const std::size_t plane = maps.height * maps.width;
    for (std::size_t n = 0; n < maps.channels; ++n) {
        const double* src = maps.values.data() + n * plane;
        double* dst = out.values.data() + n * plane;
        double max_val = *std::max_element(src, src + plane);
        double sum = 0.0;
        for (std::size_t i = 0; i < plane; ++i) {
            dst[i] = std::exp((src[i] - max_val) / cfg.alpha);
            sum += dst[i];
        }
        for (std::size_t i = 0; i < plane; ++i) dst[i] /= sum;
    }
    return out;
}

std::vector<Point2> soft_argmax(const FeatureMapStack& maps, const SoftmaxConfig& cfg) {
    FeatureMapStack soft = channel_softmax(maps, cfg);
    std::vector<Point2> points(maps.channels);
    for (std::size_t n = 0; n < maps.channels; ++n) {
        double u = 0.0, v = 0.0;
        for (std::size_t h = 0; h < maps.height; ++h) {
            double row_coord = pixel_to_norm(h, maps.height);
            for (std::size_t w = 0; w < maps.width; ++w) {
                double s = soft.at(h, w, n);
                u += pixel_to_norm(w, maps.width) * s;
                v += row_coord * s;
            }
        }
        points[n] = {u, v};
    }
    return points;
}

FeatureMapStack render_gaussian_heatmaps(const std::vector<Point2>& points,
                                         const HeatmapConfig& cfg) {
    if (!(cfg.sigma > 0.0))
        throw ValidationError("heatmap: sigma must be positive");
    if (cfg.height < 1 || cfg.width < 1)
        throw ValidationError("heatmap: dimensions must be >= 1");
    if (points.empty())
        throw ValidationError("heatmap: no points given");

    FeatureMapStack out;
    out.height = cfg.height;
    out.width = cfg.width;
    out.channels = points.size();
    out.values.resize(cfg.height * cfg.width * points.size());

    const double inv_two_sigma_sq = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
    for (std::size_t n = 0; n < points.size(); ++n) {
        for (std::size_t h = 0; h < cfg.height; ++h) {
            double dv = pixel_to_norm(h, cfg.height) - points[n].v;
            for (std::size_t w = 0; w < cfg.width; ++w) {
                double du = pixel_to_norm(w, cfg.width) - points[n].u;
                out.at(h, w, n) = std::exp(-(du * du + dv * dv) * inv_two_sigma_sq);
            }
        }
    }
    return out;
}

double reconstruction_mse(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width || a.channels != b.channels)
        throw ValidationError("reconstruction_mse: image shapes differ");
    if (a.values.size() != b.values.size() || a.values.empty())
        throw ValidationError("reconstruction_mse: empty or inconsistent image data");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double d = a.values[i] - b.values[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.values.size());
}

} // namespace kptrack
