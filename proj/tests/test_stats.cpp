#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kptrack/errors.hpp"
#include "kptrack/stats.hpp"

using namespace kptrack;

TEST_CASE("iqm basics") {
    CHECK(iqm({3.0, 3.0, 3.0, 3.0, 3.0}) == 3.0);
    // 8 samples: drop 2 from each side, mean of {3,4,5,6}
    CHECK(iqm({1, 2, 3, 4, 5, 6, 7, 8}) == doctest::Approx(4.5).epsilon(1e-15));
    CHECK_THROWS_AS(iqm({}), ValidationError);
}

TEST_CASE("iqm equals the median for symmetric samples") {
    std::vector<double> samples = {-4, -2, -1, 0, 1, 2, 4};
    CHECK(std::abs(iqm(samples) - 0.0) < 1e-12);
}

TEST_CASE("iqm is permutation-invariant and within range") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uni(-10.0, 10.0);
    std::vector<double> samples(37);
    for (double& v : samples) v = uni(rng);
    double base = iqm(samples);
    std::vector<double> shuffled = samples;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i)
        std::swap(shuffled[i], shuffled[rng() % (i + 1)]);
    CHECK(iqm(shuffled) == base);
    CHECK(base >= *std::min_element(samples.begin(), samples.end()));
    CHECK(base <= *std::max_element(samples.begin(), samples.end()));
}

TEST_CASE("iqm matches a brute-force trim oracle on random sizes") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uni(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> samples(1 + rng() % 60);
        for (double& v : samples) v = uni(rng);
        std::vector<double> sorted = samples;
        std::sort(sorted.begin(), sorted.end());
        std::size_t drop = sorted.size() / 4;
        double sum = std::accumulate(sorted.begin() + static_cast<std::ptrdiff_t>(drop),
                                     sorted.end() - static_cast<std::ptrdiff_t>(drop), 0.0);
        double expected = sum / static_cast<double>(sorted.size() - 2 * drop);
        CHECK(std::abs(iqm(samples) - expected) < 1e-12);
    }
}

TEST_CASE("bootstrap_ci determinism and degenerate data") {
    std::vector<double> constant(20, 2.5);
    IntervalEstimate est = bootstrap_ci(constant, Statistic::Mean, 0.95, 500, 3);
    CHECK(est.lower == 2.5);
    CHECK(est.upper == 2.5);
    CHECK(est.point == 2.5);

    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> samples(50);
    for (double& v : samples) v = gauss(rng);
    IntervalEstimate a = bootstrap_ci(samples, Statistic::Iqm, 0.95, 1000, 7);
    IntervalEstimate b = bootstrap_ci(samples, Statistic::Iqm, 0.95, 1000, 7);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    CHECK(a.lower <= a.upper);
}

TEST_CASE("bootstrap_ci input validation") {
    CHECK_THROWS_AS(bootstrap_ci({1.0}, Statistic::Mean, 0.95, 500, 0), ValidationError);
    CHECK_THROWS_AS(bootstrap_ci({1.0, 2.0}, Statistic::Mean, 1.5, 500, 0), ValidationError);
    CHECK_THROWS_AS(bootstrap_ci({1.0, 2.0}, Statistic::Mean, 0.95, 50, 0), ValidationError);
}

TEST_CASE("bootstrap mean CI approaches the CLT interval") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> samples(1000);
    for (double& v : samples) v = gauss(rng);
    IntervalEstimate est = bootstrap_ci(samples, Statistic::Mean, 0.95, 10000, 11);
    double width = est.upper - est.lower;
    double analytic = 2.0 * 1.96 / std::sqrt(1000.0);
    CHECK(width > 0.8 * analytic);
    CHECK(width < 1.2 * analytic);
    CHECK(est.lower <= est.point);
    CHECK(est.point <= est.upper);
}

TEST_CASE("bootstrap result is independent of the worker count") {
    std::vector<double> samples = {0.1, 0.9, 0.4, 0.3, 0.8, 0.2, 0.7};
    setenv("KPTRACK_THREADS", "1", 1);
    IntervalEstimate serial = bootstrap_ci(samples, Statistic::Mean, 0.9, 400, 13);
    setenv("KPTRACK_THREADS", "4", 1);
    IntervalEstimate parallel = bootstrap_ci(samples, Statistic::Mean, 0.9, 400, 13);
    unsetenv("KPTRACK_THREADS");
    CHECK(serial.lower == parallel.lower);
    CHECK(serial.upper == parallel.upper);
}

TEST_CASE("gaussian_smooth preserves constants and degenerates to identity") {
    std::vector<double> constant(40, 1.25);
    std::vector<double> smoothed = gaussian_smooth(constant, 2.5);
    for (double v : smoothed) CHECK(std::abs(v - 1.25) < 1e-12);

    std::vector<double> series = {1, 5, 2, 8, 3};
    CHECK(gaussian_smooth(series, 0.01) == series);
    CHECK_THROWS_AS(gaussian_smooth({}, 1.0), ValidationError);
}

TEST_CASE("gaussian_smooth of a unit impulse reproduces the normalized kernel") {
    const double sigma = 2.5;
    const long radius = static_cast<long>(std::ceil(4.0 * sigma));
    std::vector<double> impulse(2 * radius + 21, 0.0);
    const long center = radius + 10;
    impulse[static_cast<std::size_t>(center)] = 1.0;
    std::vector<double> smoothed = gaussian_smooth(impulse, sigma);

    // oracle: directly computed truncated, renormalized kernel
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (long i = -radius; i <= radius; ++i) {
        kernel[static_cast<std::size_t>(i + radius)] =
            std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
        sum += kernel[static_cast<std::size_t>(i + radius)];
    }
    for (long i = -radius; i <= radius; ++i)
        CHECK(std::abs(smoothed[static_cast<std::size_t>(center + i)] -
                       kernel[static_cast<std::size_t>(i + radius)] / sum) < 1e-12);
}

TEST_CASE("gaussian_smooth never extends the series range") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    std::vector<double> series(60);
    for (double& v : series) v = uni(rng);
    std::vector<double> smoothed = gaussian_smooth(series, 2.5);
    double lo = *std::min_element(series.begin(), series.end());
    double hi = *std::max_element(series.begin(), series.end());
    for (double v : smoothed) {
        CHECK(v >= lo - 1e-12);
        CHECK(v <= hi + 1e-12);
    }
}

TEST_CASE("box_summary basics") {
    BoxSummary single = box_summary({4.2});
    CHECK(single.q1 == 4.2);
    CHECK(single.median == 4.2);
    CHECK(single.q3 == 4.2);
    CHECK(single.whisker_low == 4.2);
    CHECK(single.whisker_high == 4.2);
    CHECK(single.outliers.empty());

    CHECK_THROWS_AS(box_summary({}), ValidationError);
}

TEST_CASE("box_summary quartiles use linear interpolation") {
    std::vector<double> samples(100);
    std::iota(samples.begin(), samples.end(), 1.0);
    BoxSummary box = box_summary(samples);
    CHECK(box.q1 == doctest::Approx(25.75).epsilon(1e-12));
    CHECK(box.median == doctest::Approx(50.5).epsilon(1e-12));
    CHECK(box.q3 == doctest::Approx(75.25).epsilon(1e-12));
    CHECK(box.outliers.empty());
}

TEST_CASE("Tukey rule flags extreme values as outliers") {
    std::vector<double> samples = {1.0, 1.1, 0.9, 1.2, 1.05, 0.95, 100.0};
    BoxSummary box = box_summary(samples);
    REQUIRE(box.outliers.size() == 1);
    CHECK(box.outliers[0] == 100.0);
    CHECK(box.whisker_high <= 1.2);
}

TEST_CASE("box_summary quartiles match a sort-based oracle on random data") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(-5.0, 5.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> samples(2 + rng() % 100);
        for (double& v : samples) v = uni(rng);
        BoxSummary box = box_summary(samples);

        std::vector<double> sorted = samples;
        std::sort(sorted.begin(), sorted.end());
        auto q = [&](double p) {
            double pos = p * static_cast<double>(sorted.size() - 1);
            std::size_t lo = static_cast<std::size_t>(std::floor(pos));
            std::size_t hi = std::min(lo + 1, sorted.size() - 1);
            return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
        };
        CHECK(std::abs(box.q1 - q(0.25)) < 1e-12);
        CHECK(std::abs(box.median - q(0.5)) < 1e-12);
        CHECK(std::abs(box.q3 - q(0.75)) < 1e-12);
        CHECK(box.q1 <= box.median);
        CHECK(box.median <= box.q3);
    }
}
