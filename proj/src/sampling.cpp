#include "gplab/sampling.hpp"

#include <cmath>

#include "gplab/errors.hpp"
#include "gplab/stats.hpp"

namespace gplab {

double gaussian_density(std::span<const double> x) {
    const double d = static_cast<double>(x.size());
    return std::pow(2.0 * M_PI, -0.5 * d) * std::exp(-0.5 * norm2(x));
}

void gaussian_cloud_into(PointCloud& out, long long n, int d, RandomStream& rs) {
    out.dim = d;
    out.xs.resize(static_cast<size_t>(n) * d);
    rs.gaussian_fill(out.xs);
}

PointCloud gaussian_cloud(long long n, int d, RandomStream& rs) {
    PointCloud c(d);
    gaussian_cloud_into(c, n, d, rs);
    return c;
}

void poisson_gaussian_cloud_into(PointCloud& out, double lambda, int d, RandomStream& rs) {
    if (!(lambda > 0.0)) throw NonPositiveValue("poisson_gaussian_cloud: lambda must be > 0");
    gaussian_cloud_into(out, rs.poisson(lambda), d, rs);
}

PointCloud poisson_gaussian_cloud(double lambda, int d, RandomStream& rs) {
    PointCloud c(d);
    poisson_gaussian_cloud_into(c, lambda, d, rs);
    return c;
}

MCEstimate estimate_gaussian_measure(int d, const RegionPredicate& region,
                                     long long samples, RandomStream& rs) {
    if (samples < 1) throw TooFewSamples("estimate_gaussian_measure: need samples >= 1");
    double x[kMaxDim];
    long long hits = 0;
    for (long long i = 0; i < samples; ++i) {
        for (int k = 0; k < d; ++k) x[k] = rs.gaussian();
        if (region(std::span<const double>(x, static_cast<size_t>(d)))) ++hits;
    }
    MCEstimate e;
    e.n_samples = samples;
    e.value = static_cast<double>(hits) / static_cast<double>(samples);
    e.std_error = binomial_std_error(e.value, samples);
    return e;
}

void uniform_in_simplex(const Simplex& s, RandomStream& rs, double* out) {
    const int d = s.dim;
    double w[kMaxDim + 1];
    double total = 0.0;
    for (int i = 0; i <= d; ++i) {
        // -log U is Exp(1); normalized exponentials are flat Dirichlet.
        double u;
        do { u = rs.uniform01(); } while (u <= 0.0);
        w[i] = -std::log(u);
        total += w[i];
    }
    for (int k = 0; k < d; ++k) out[k] = 0.0;
    for (int i = 0; i <= d; ++i) {
        const double lam = w[i] / total;
        auto v = s.vertex(i);
        for (int k = 0; k < d; ++k) out[k] += lam * v[k];
    }
}

MCEstimate gaussian_measure_simplex(const Simplex& s, long long samples, RandomStream& rs) {
    if (samples < 1) throw TooFewSamples("gaussian_measure_simplex: need samples >= 1");
    const double vol = simplex_volume(s);
    double x[kMaxDim];
    SummaryStats stats;
    for (long long i = 0; i < samples; ++i) {
        uniform_in_simplex(s, rs, x);
        stats.add(gaussian_density(std::span<const double>(x, static_cast<size_t>(s.dim))));
    }
    MCEstimate e;
    e.n_samples = samples;
    e.value = vol * stats.mean;
    e.std_error = vol * stats.mean_std_error();
    return e;
}

Vec min_norm_point_in_simplex(const Simplex& s) {
    const int d = s.dim;
    const int nv = d + 1;
    Vec best;
    double best_norm2 = std::numeric_limits<double>::infinity();

    // Faces are nonempty subsets of vertices; for each, the minimizer over
    // the affine hull is a least-squares solve, kept when its barycentric
    // coordinates are nonnegative.
    for (unsigned mask = 1; mask < (1u << nv); ++mask) {
        int idx[kMaxDim + 1] = {};
        int k = 0;
        for (int i = 0; i < nv; ++i) {
            if (mask & (1u << i)) idx[k++] = i;
        }
        const auto v0 = s.vertex(idx[0]);
        const int m = k - 1;  // affine parameters
        double cand[kMaxDim];
        if (m == 0) {
            for (int j = 0; j < d; ++j) cand[j] = v0[j];
        } else {
            // Columns a_i = v_i - v_0; solve (A^T A) t = -A^T v0.
            double ata[kMaxDim * kMaxDim];
            double rhs[kMaxDim];
            double cols[(kMaxDim + 1) * kMaxDim];
            for (int i = 0; i < m; ++i) {
                const auto vi = s.vertex(idx[i + 1]);
                for (int j = 0; j < d; ++j) cols[i * d + j] = vi[j] - v0[j];
            }
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m; ++j) {
                    double acc = 0.0;
                    for (int t = 0; t < d; ++t) acc += cols[i * d + t] * cols[j * d + t];
                    ata[i * m + j] = acc;
                }
                double acc = 0.0;
                for (int t = 0; t < d; ++t) acc += cols[i * d + t] * v0[t];
                rhs[i] = -acc;
            }
            const SquareLU lu = SquareLU::factor(ata, m, 1e-300);
            double t[kMaxDim];
            if (!lu.solve(rhs, t)) continue;  // degenerate face; subsets cover it
            double lam0 = 1.0;
            bool feasible = true;
            for (int i = 0; i < m; ++i) {
                if (t[i] < -1e-12) feasible = false;
                lam0 -= t[i];
            }
            if (!feasible || lam0 < -1e-12) continue;
            for (int j = 0; j < d; ++j) {
                double acc = v0[j];
                for (int i = 0; i < m; ++i) acc += t[i] * cols[i * d + j];
                cand[j] = acc;
            }
        }
        double n2 = 0.0;
        for (int j = 0; j < d; ++j) n2 += cand[j] * cand[j];
        if (n2 < best_norm2) {
            best_norm2 = n2;
            best.assign(cand, cand + d);
        }
    }
    return best;
}

RestrictedGaussianSampler::RestrictedGaussianSampler(const Simplex& s) : simplex_(s) {
    if (!(simplex_volume(s) > 0.0)) {
        throw DegenerateInput("RestrictedGaussianSampler: simplex has no volume");
    }
    const Vec closest = min_norm_point_in_simplex(s);
    max_density_ = gaussian_density(closest);
}

Vec RestrictedGaussianSampler::sample(RandomStream& rs) const {
    const int d = simplex_.dim;
    double x[kMaxDim];
    for (long long trial = 0; trial < kRejectionBudget; ++trial) {
        uniform_in_simplex(simplex_, rs, x);
        const double ratio =
            gaussian_density(std::span<const double>(x, static_cast<size_t>(d))) / max_density_;
        if (rs.uniform01() < ratio) return Vec(x, x + d);
    }
    throw RejectionBudgetExceeded("gaussian_restricted: exceeded 1e6 proposals");
}

Vec gaussian_restricted(const Simplex& s, RandomStream& rs) {
    RestrictedGaussianSampler sampler(s);
    return sampler.sample(rs);
}

}  // namespace gplab
