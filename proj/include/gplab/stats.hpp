#pragma once

#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "gplab/random.hpp"

namespace gplab {

// Single-pass moment accumulator (Welford update, Chan merge). Value type:
// merge supports map-reduce over workers.
struct SummaryStats {
    long long count = 0;
    double mean = 0.0;
    double m2 = 0.0;  // sum of squared deviations from the running mean
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();

    void add(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
        if (x < min) min = x;
        if (x > max) max = x;
    }

    // Unbiased sample variance; NaN for fewer than two values.
    double variance() const {
        if (count < 2) return std::numeric_limits<double>::quiet_NaN();
        return m2 / static_cast<double>(count - 1);
    }

    double stddev() const;

    // Standard error of the mean.
    double mean_std_error() const;

    static SummaryStats merged(const SummaryStats& a, const SummaryStats& b);
};

SummaryStats accumulate_all(std::span<const double> xs);

// Least-squares fit of log y on log log n with a percentile-bootstrap CI for
// the slope (resampling pairs). The regressor is log log n so that a power
// of log n reads off directly as the slope.
struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_ci_lo = 0.0;
    double slope_ci_hi = 0.0;
    int n_points = 0;
};

inline constexpr int kBootstrapResamples = 1000;

ScalingFit scaling_fit(std::span<const std::pair<double, double>> n_y, RandomStream& boot);

// Kolmogorov-Smirnov distance of the standardized sample from the standard
// normal CDF.
double normality_diagnostic(std::span<const double> sample);

// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

struct TailFrequency {
    double fraction = 0.0;
    double std_error = 0.0;
    long long count = 0;
};

// Empirical probability of |x - mean| >= y * stddev.
TailFrequency tail_frequency(std::span<const double> sample, double y);

// Standard normal CDF.
double normal_cdf(double x);

double binomial_std_error(double p_hat, long long n);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Exact (Clopper-Pearson) binomial confidence interval.
Interval clopper_pearson(long long successes, long long trials, double confidence = 0.95);

Interval percentile_interval(std::vector<double> values, double confidence);

// Percentile bootstrap CI of `stat` over `sample`.
template <typename Stat>
Interval bootstrap_ci(std::span<const double> sample, Stat stat, int resamples,
                      RandomStream& rs, double confidence = 0.95) {
    std::vector<double> buf(sample.size());
    std::vector<double> stats;
    stats.reserve(static_cast<size_t>(resamples));
    for (int b = 0; b < resamples; ++b) {
        for (size_t i = 0; i < sample.size(); ++i) {
            const size_t j = static_cast<size_t>(rs.next_u64() % sample.size());
            buf[i] = sample[j];
        }
        stats.push_back(stat(std::span<const double>(buf)));
    }
    return percentile_interval(stats, confidence);
}

double sample_mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

}  // namespace gplab
