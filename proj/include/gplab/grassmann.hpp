#pragma once

#include <span>
#include <vector>

#include "gplab/estimate.hpp"
#include "gplab/geometry.hpp"
#include "gplab/random.hpp"
#include "gplab/vecmath.hpp"

namespace gplab {

// Comparison slack for angle tests against cone boundaries.
inline constexpr double kAngleTol = 1e-9;

// An element of the Grassmannian G(d, l): l orthonormal basis vectors of a
// linear subspace of R^d.
struct Subspace {
    int dim_ambient = 0;
    int dim_sub = 0;
    std::vector<double> basis;  // l rows of length d

    std::span<const double> basis_vec(int k) const {
        return {basis.data() + static_cast<size_t>(k) * dim_ambient,
                static_cast<size_t>(dim_ambient)};
    }
};

// C(z, alpha): directions within angle alpha of the axis, anchored at apex.
// Angle tests always translate the apex to the origin; affine membership
// subtracts the apex first.
struct CircularCone {
    Vec apex;
    Vec axis;  // unit
    double half_angle = 0.0;

    bool contains_direction(std::span<const double> u, double tol = kAngleTol) const;
    bool contains_point(std::span<const double> x, double tol = kAngleTol) const;
};

// Haar-distributed subspace: orthonormalized i.i.d. Gaussian vectors, with
// each basis vector's first nonzero component made positive so that a fixed
// seed reproduces an identical basis.
Subspace sample_subspace(int d, int l, RandomStream& rs);

PointCloud project_cloud(const PointCloud& cloud, const Subspace& L);

// out must hold L.dim_sub doubles.
void project_point(std::span<const double> x, const Subspace& L, double* out);

// Minimal angle between z and any nonzero vector of L, in [0, pi/2].
double angle_to_subspace(std::span<const double> z, const Subspace& L);

// True iff L contains a nonzero vector of the cone (as a cone of
// directions), i.e. angle(axis, L) <= half_angle.
bool subspace_meets_cone(const Subspace& L, const CircularCone& c);

// Haar fraction of subspaces with angle(z, L) <= a, with binomial standard
// error.
MCEstimate cap_measure_estimate(std::span<const double> z, double a, int d, int l,
                                long long samples, RandomStream& rs);

}  // namespace gplab
