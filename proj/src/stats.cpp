#include "kptrack/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kptrack/errors.hpp"
#include "kptrack/parallel.hpp"

namespace kptrack {

namespace {

// splitmix64; decorrelates the per-resample seeds derived from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void require_finite(const std::vector<double>& samples, const char* op) {
    for (double v : samples)
        if (!std::isfinite(v))
            throw ValidationError(std::string(op) + ": non-finite sample");
}

} // namespace

double iqm(const std::vector<double>& samples) {
    if (samples.empty())
        throw ValidationError("iqm: empty sample list");
    require_finite(samples, "iqm");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    std::size_t drop = sorted.size() / 4;
    double sum = 0.0;
    for (std::size_t i = drop; i < sorted.size() - drop; ++i) sum += sorted[i];
    return sum / static_cast<double>(sorted.size() - 2 * drop);
}

double evaluate_statistic(const std::vector<double>& samples, Statistic stat) {
    if (stat == Statistic::Iqm) return iqm(samples);
    if (samples.empty())
        throw ValidationError("mean: empty sample list");
    double sum = 0.0;
    for (double v : samples) sum += v;
    return sum / static_cast<double>(samples.size());
}

IntervalEstimate bootstrap_ci(const std::vector<double>& samples, Statistic stat,
                              double level, std::size_t num_bootstrap, long seed) {
    if (samples.size() < 2)
        throw ValidationError("bootstrap_ci: need at least 2 samples");
    if (!(level > 0.0 && level < 1.0))
        throw ValidationError("bootstrap_ci: level must be in (0, 1)");
    if (num_bootstrap < 100)
        throw ValidationError("bootstrap_ci: need at least 100 resamples");
    require_finite(samples, "bootstrap_ci");

    std::vector<double> stats(num_bootstrap);
    parallel_for(num_bootstrap, [&](std::size_t i) {
        std::mt19937_64 rng(mix_seed(static_cast<std::uint64_t>(seed), i));
        std::vector<double> resample(samples.size());
        for (double& v : resample)
            v = samples[rng() % samples.size()];
        stats[i] = evaluate_statistic(resample, stat);
    });
    std::sort(stats.begin(), stats.end());

    IntervalEstimate est;
    est.point = evaluate_statistic(samples, stat);
    est.level = level;
    est.num_bootstrap = num_bootstrap;
    est.seed = seed;
    double tail = (1.0 - level) / 2.0;
    est.lower = quantile(stats, tail);
    est.upper = quantile(stats, 1.0 - tail);
    est.point_outside_interval = est.point < est.lower || est.point > est.upper;
    return est;
}

std::vector<double> gaussian_smooth(const std::vector<double>& series, double sigma_steps) {
    if (series.empty())
        throw ValidationError("gaussian_smooth: empty series");
    require_finite(series, "gaussian_smooth");
    if (sigma_steps < 0.05) return series;

    const long radius = static_cast<long>(std::ceil(4.0 * sigma_steps));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (long i = -radius; i <= radius; ++i) {
        double w = std::exp(-0.5 * static_cast<double>(i * i) / (sigma_steps * sigma_steps));
        kernel[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (double& w : kernel) w /= sum;

    const long n = static_cast<long>(series.size());
    auto reflect = [&](long idx) {
        // (d c b a | a b c d | d c b a) edge handling
        while (idx < 0 || idx >= n) {
            if (idx < 0) idx = -idx - 1;
            if (idx >= n) idx = 2 * n - idx - 1;
        }
        return static_cast<std::size_t>(idx);
    };

    std::vector<double> out(series.size());
    for (long t = 0; t < n; ++t) {
        double acc = 0.0;
        for (long i = -radius; i <= radius; ++i)
            acc += kernel[static_cast<std::size_t>(i + radius)] * series[reflect(t + i)];
        out[static_cast<std::size_t>(t)] = acc;
    }
    return out;
}

double quantile(std::vector<double> samples, double p) {
    if (samples.empty())
        throw ValidationError("quantile: empty sample list");
    std::sort(samples.begin(), samples.end());
    if (samples.size() == 1) return samples.front();
    double pos = p * static_cast<double>(samples.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, samples.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return samples[lo] + frac * (samples[hi] - samples[lo]);
}

BoxSummary box_summary(const std::vector<double>& samples) {
    if (samples.empty())
        throw ValidationError("box_summary: empty sample list");
    require_finite(samples, "box_summary");

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());

    BoxSummary box;
    box.q1 = quantile(sorted, 0.25);
    box.median = quantile(sorted, 0.5);
    box.q3 = quantile(sorted, 0.75);
    double iqr = box.q3 - box.q1;
    double low_fence = box.q1 - 1.5 * iqr;
    double high_fence = box.q3 + 1.5 * iqr;

    // Whiskers extend to the most extreme data points inside the fences.
    box.whisker_low = box.q1;
    box.whisker_high = box.q3;
    for (double v : sorted) {
        if (v >= low_fence) { box.whisker_low = v; break; }
    }
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
        if (*it <= high_fence) { box.whisker_high = *it; break; }
    }
    for (double v : sorted)
        if (v < low_fence || v > high_fence) box.outliers.push_back(v);
    return box;
}

} // namespace kptrack
