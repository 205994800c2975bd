#pragma once

#include <span>

#include "gplab/geometry.hpp"
#include "gplab/grassmann.hpp"
#include "gplab/random.hpp"

namespace gplab {

// Volume of the j-dimensional unit ball, pi^(j/2) / Gamma(1 + j/2).
double kappa(int j);

// binom(d, l) * kappa_d / (kappa_l * kappa_{d-l}).
double kubota_prefactor(int d, int ell);

enum class IVMethod { ExactVolume, ExactSurface, KubotaMC, SupportMC };

const char* method_name(IVMethod m);

struct IVEstimate {
    int ell = 0;
    double value = 0.0;
    double std_error = 0.0;  // 0 for exact methods
    long long n_samples = 0;
    IVMethod method = IVMethod::ExactVolume;
};

struct IVParams {
    long long n_subspaces = 2000;
    long long n_directions = 10000;
};

// V_ell of the hull of a point cloud. ExactVolume requires ell == d,
// ExactSurface requires ell == d-1 (V_{d-1} = surface/2), SupportMC requires
// ell == 1; KubotaMC works for any 1 <= ell <= d. `rs` is required for the
// MC methods.
IVEstimate intrinsic_volume(const PointCloud& cloud, int ell, IVMethod method,
                            const IVParams& params, RandomStream* rs);

// Kubota Monte Carlo over an explicit subspace sample: the prefactored mean
// of projected hull volumes. Sharing one sample across calls gives
// common-random-number comparisons.
IVEstimate kubota_estimate(const PointCloud& cloud, int ell,
                           std::span<const Subspace> subspaces);

// V_1 from the sphere average of the support function:
// (d kappa_d / kappa_{d-1}) * E_u[h(u)].
IVEstimate v1_support_estimate(const PointCloud& cloud, long long n_directions,
                               RandomStream& rs);

// Localized Kubota functional: prefactor times the mean over the given
// subspaces of 1{L meets cone} * vol_ell(hull({z} union F) | L). The caller
// controls the subspace list so that paired differences share randomness.
double local_functional(std::span<const double> z, const PointCloud& F,
                        const CircularCone& cone, int ell,
                        std::span<const Subspace> subspaces);

// vol_ell of the projection of the hull of `cloud` onto L; 0 when the
// projection is not full-dimensional in L.
double projected_hull_volume(const PointCloud& cloud, const Subspace& L);

}  // namespace gplab
