#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kptrack {

enum class Statistic { Iqm, Mean };

struct IntervalEstimate {
    double point = 0.0; ///< plug-in statistic on the original samples
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    std::size_t num_bootstrap = 0;
    long seed = 0;
    /// Set when the plug-in statistic falls outside the percentile interval,
    /// which can happen for skewed data at low levels.
    bool point_outside_interval = false;
};

/// Five-number summary with Tukey whiskers at 1.5 * IQR.
struct BoxSummary {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::vector<double> outliers;
};

/// Interquartile mean: mean after dropping floor(count/4) samples from each
/// end of the sorted list.
double iqm(const std::vector<double>& samples);

double evaluate_statistic(const std::vector<double>& samples, Statistic stat);

/// Percentile bootstrap interval over resamples with replacement. Each
/// resample derives its RNG from (seed, resample index), so the result is
/// independent of evaluation order and worker count.
IntervalEstimate bootstrap_ci(const std::vector<double>& samples, Statistic stat,
                              double level, std::size_t num_bootstrap, long seed);

/// Discrete Gaussian convolution: kernel truncated at 4 sigma and
/// renormalized, reflect-padded boundaries, length preserved. Sigma below
/// 0.05 is treated as identity.
std::vector<double> gaussian_smooth(const std::vector<double>& series, double sigma_steps);

/// Quantile by linear interpolation between order statistics, p in [0, 1].
double quantile(std::vector<double> samples, double p);

BoxSummary box_summary(const std::vector<double>& samples);

} // namespace kptrack
