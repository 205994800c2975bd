#pragma once

#include <functional>
#include <span>

#include "gplab/estimate.hpp"
#include "gplab/geometry.hpp"
#include "gplab/random.hpp"

namespace gplab {

// Standard Gaussian density (2*pi)^(-d/2) * exp(-|x|^2 / 2).
double gaussian_density(std::span<const double> x);

// n i.i.d. standard Gaussian points in R^d.
PointCloud gaussian_cloud(long long n, int d, RandomStream& rs);
void gaussian_cloud_into(PointCloud& out, long long n, int d, RandomStream& rs);

// Poisson(lambda) many i.i.d. standard Gaussian points.
PointCloud poisson_gaussian_cloud(double lambda, int d, RandomStream& rs);
void poisson_gaussian_cloud_into(PointCloud& out, double lambda, int d, RandomStream& rs);

using RegionPredicate = std::function<bool(std::span<const double>)>;

// Plain Monte Carlo Gaussian measure of a region.
MCEstimate estimate_gaussian_measure(int d, const RegionPredicate& region,
                                     long long samples, RandomStream& rs);

// Importance-sampled Gaussian measure of a simplex: vol(S) times the mean
// density over uniform points of S. Exact in expectation, usable at
// probabilities far below 1/samples.
MCEstimate gaussian_measure_simplex(const Simplex& s, long long samples, RandomStream& rs);

// Uniform point in a simplex via normalized exponential (flat Dirichlet)
// weights. out must hold s.dim doubles.
void uniform_in_simplex(const Simplex& s, RandomStream& rs, double* out);

// Exact minimizer of |x| over the simplex, by enumerating faces.
Vec min_norm_point_in_simplex(const Simplex& s);

// Samples from the Gaussian measure conditioned on a simplex, by rejection
// from the uniform proposal with the exact density bound at the min-norm
// point. Construct once per region; sampling is cheap.
class RestrictedGaussianSampler {
public:
    explicit RestrictedGaussianSampler(const Simplex& s);

    // Throws RejectionBudgetExceeded after 1e6 proposals.
    Vec sample(RandomStream& rs) const;

    double density_bound() const { return max_density_; }

private:
    Simplex simplex_;
    double max_density_ = 0.0;
};

Vec gaussian_restricted(const Simplex& s, RandomStream& rs);

inline constexpr long long kRejectionBudget = 1000000;

}  // namespace gplab
