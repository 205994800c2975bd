#include "gplab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "gplab/errors.hpp"

namespace gplab {

double SummaryStats::stddev() const { return std::sqrt(variance()); }

double SummaryStats::mean_std_error() const {
    if (count < 2) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(variance() / static_cast<double>(count));
}

SummaryStats SummaryStats::merged(const SummaryStats& a, const SummaryStats& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    SummaryStats r;
    r.count = a.count + b.count;
    const double delta = b.mean - a.mean;
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    r.mean = a.mean + delta * nb / (na + nb);
    r.m2 = a.m2 + b.m2 + delta * delta * na * nb / (na + nb);
    r.min = std::min(a.min, b.min);
    r.max = std::max(a.max, b.max);
    return r;
}

SummaryStats accumulate_all(std::span<const double> xs) {
    SummaryStats s;
    for (double x : xs) s.add(x);
    return s;
}

double sample_mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    return accumulate_all(xs).variance();
}

namespace {

struct LineFit {
    double slope, intercept, r2;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    const size_t n = x.size();
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LineFit f;
    f.slope = (sxx > 0.0) ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    if (syy <= 1e-300) {
        f.r2 = 1.0;  // perfectly flat data is perfectly fit by the flat line
    } else {
        const double ss_res = syy - f.slope * sxy;
        f.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return f;
}

}  // namespace

ScalingFit scaling_fit(std::span<const std::pair<double, double>> n_y, RandomStream& boot) {
    if (n_y.size() < 3) throw TooFewSamples("scaling_fit: need at least 3 pairs");
    std::vector<double> xs, ys;
    xs.reserve(n_y.size());
    ys.reserve(n_y.size());
    for (const auto& [n, y] : n_y) {
        if (n < 3.0) throw NonPositiveValue("scaling_fit: n must be >= 3");
        if (!(y > 0.0)) throw NonPositiveValue("scaling_fit: y values must be positive");
        xs.push_back(std::log(std::log(n)));
        ys.push_back(std::log(y));
    }
    const LineFit base = least_squares(xs, ys);
    ScalingFit fit;
    fit.slope = base.slope;
    fit.intercept = base.intercept;
    fit.r_squared = base.r2;
    fit.n_points = static_cast<int>(n_y.size());

    std::vector<double> slopes;
    slopes.reserve(kBootstrapResamples);
    std::vector<double> bx(xs.size()), by(ys.size());
    for (int b = 0; b < kBootstrapResamples; ++b) {
        for (size_t i = 0; i < xs.size(); ++i) {
            const size_t j = static_cast<size_t>(boot.next_u64() % xs.size());
            bx[i] = xs[j];
            by[i] = ys[j];
        }
        slopes.push_back(least_squares(bx, by).slope);
    }
    const Interval ci = percentile_interval(std::move(slopes), 0.95);
    fit.slope_ci_lo = ci.lo;
    fit.slope_ci_hi = ci.hi;
    return fit;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normality_diagnostic(std::span<const double> sample) {
    if (sample.size() < 30) throw TooFewSamples("normality_diagnostic: need >= 30 values");
    const SummaryStats s = accumulate_all(sample);
    const double sd = s.stddev();
    if (!(sd > 0.0)) throw DegenerateSample("normality_diagnostic: zero standard deviation");
    std::vector<double> z(sample.begin(), sample.end());
    for (auto& v : z) v = (v - s.mean) / sd;
    std::sort(z.begin(), z.end());
    const double n = static_cast<double>(z.size());
    double d = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
        const double f = normal_cdf(z[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(std::fabs(f - lo), std::fabs(hi - f)));
    }
    return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    while (i < sa.size() && j < sb.size()) {
        if (sa[i] <= sb[j]) ++i; else ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

TailFrequency tail_frequency(std::span<const double> sample, double y) {
    if (sample.size() < 2) throw TooFewSamples("tail_frequency: need >= 2 values");
    const SummaryStats s = accumulate_all(sample);
    const double sd = s.stddev();
    if (!(sd > 0.0)) throw DegenerateSample("tail_frequency: zero standard deviation");
    long long k = 0;
    for (double x : sample) {
        if (std::fabs(x - s.mean) >= y * sd) ++k;
    }
    TailFrequency t;
    t.count = k;
    t.fraction = static_cast<double>(k) / static_cast<double>(sample.size());
    t.std_error = binomial_std_error(t.fraction, static_cast<long long>(sample.size()));
    return t;
}

double binomial_std_error(double p_hat, long long n) {
    if (n <= 0) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) / static_cast<double>(n));
}

Interval percentile_interval(std::vector<double> values, double confidence) {
    std::sort(values.begin(), values.end());
    const double alpha = (1.0 - confidence) / 2.0;
    const auto pick = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const size_t i = static_cast<size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        if (i + 1 >= values.size()) return values.back();
        return values[i] * (1.0 - frac) + values[i + 1] * frac;
    };
    return Interval{pick(alpha), pick(1.0 - alpha)};
}

namespace {

// Continued-fraction evaluation for the incomplete beta function.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * betacf(a, b, x) / a;
    }
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

namespace {

// Solves incomplete_beta(a, b, x) = p by bisection.
double beta_quantile(double a, double b, double p) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (incomplete_beta(a, b, mid) < p) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Interval clopper_pearson(long long successes, long long trials, double confidence) {
    const double alpha = 1.0 - confidence;
    const double k = static_cast<double>(successes);
    const double n = static_cast<double>(trials);
    Interval ci;
    ci.lo = (successes == 0) ? 0.0 : beta_quantile(k, n - k + 1.0, alpha / 2.0);
    ci.hi = (successes == trials) ? 1.0 : beta_quantile(k + 1.0, n - k, 1.0 - alpha / 2.0);
    return ci;
}

}  // namespace gplab
