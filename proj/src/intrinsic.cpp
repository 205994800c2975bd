#include "gplab/intrinsic.hpp"

#include <cmath>

#include "gplab/errors.hpp"
#include "gplab/stats.hpp"

namespace gplab {

double kappa(int j) {
    return std::pow(M_PI, 0.5 * j) / std::tgamma(1.0 + 0.5 * j);
}

double kubota_prefactor(int d, int ell) {
    double binom = 1.0;
    for (int i = 1; i <= ell; ++i) {
        binom *= static_cast<double>(d - ell + i) / static_cast<double>(i);
    }
    return binom * kappa(d) / (kappa(ell) * kappa(d - ell));
}

const char* method_name(IVMethod m) {
    switch (m) {
        case IVMethod::ExactVolume: return "exact-volume";
        case IVMethod::ExactSurface: return "exact-surface";
        case IVMethod::KubotaMC: return "kubota-mc";
        case IVMethod::SupportMC: return "support-mc";
    }
    return "?";
}

namespace {

// Hull volume that treats sub-full-dimensional input as measure zero.
double hull_volume_or_zero(const PointCloud& cloud, ConvexHullBuilder& builder) {
    if (cloud.size() < static_cast<size_t>(cloud.dim) + 1) return 0.0;
    try {
        return builder.hull_volume(cloud);
    } catch (const DegenerateInput&) {
        return 0.0;
    }
}

}  // namespace

double projected_hull_volume(const PointCloud& cloud, const Subspace& L) {
    ConvexHullBuilder builder;
    const PointCloud proj = project_cloud(cloud, L);
    return hull_volume_or_zero(proj, builder);
}

IVEstimate kubota_estimate(const PointCloud& cloud, int ell,
                           std::span<const Subspace> subspaces) {
    if (subspaces.empty()) throw TooFewSamples("kubota_estimate: empty subspace list");
    const int d = cloud.dim;
    const double pref = kubota_prefactor(d, ell);
    ConvexHullBuilder builder;
    PointCloud proj(ell);
    SummaryStats stats;
    for (const Subspace& L : subspaces) {
        if (L.dim_ambient != d || L.dim_sub != ell) {
            throw DimensionMismatch("kubota_estimate: subspace dims do not match");
        }
        proj.xs.resize(cloud.size() * static_cast<size_t>(ell));
        double* o = proj.xs.data();
        for (size_t i = 0; i < cloud.size(); ++i, o += ell) {
            project_point(cloud.point(i), L, o);
        }
        stats.add(hull_volume_or_zero(proj, builder));
    }
    IVEstimate e;
    e.ell = ell;
    e.method = IVMethod::KubotaMC;
    e.n_samples = stats.count;
    e.value = pref * stats.mean;
    e.std_error = (stats.count > 1) ? pref * stats.mean_std_error() : 0.0;
    return e;
}

IVEstimate v1_support_estimate(const PointCloud& cloud, long long n_directions,
                               RandomStream& rs) {
    if (cloud.empty()) throw EmptyCloud("v1_support_estimate: empty cloud");
    const int d = cloud.dim;
    const double factor = d * kappa(d) / kappa(d - 1);
    double u[kMaxDim];
    SummaryStats stats;
    for (long long i = 0; i < n_directions; ++i) {
        rs.unit_vector(d, u);
        stats.add(support_value(cloud, std::span<const double>(u, static_cast<size_t>(d))));
    }
    IVEstimate e;
    e.ell = 1;
    e.method = IVMethod::SupportMC;
    e.n_samples = stats.count;
    e.value = factor * stats.mean;
    e.std_error = (stats.count > 1) ? factor * stats.mean_std_error() : 0.0;
    return e;
}

IVEstimate intrinsic_volume(const PointCloud& cloud, int ell, IVMethod method,
                            const IVParams& params, RandomStream* rs) {
    const int d = cloud.dim;
    if (ell < 1 || ell > d) throw MethodMismatch("intrinsic_volume: need 1 <= ell <= d");
    switch (method) {
        case IVMethod::ExactVolume: {
            if (ell != d) throw MethodMismatch("exact-volume requires ell == d");
            const Polytope p = convex_hull(cloud);
            return IVEstimate{ell, polytope_volume(p), 0.0, 0, IVMethod::ExactVolume};
        }
        case IVMethod::ExactSurface: {
            if (ell != d - 1) throw MethodMismatch("exact-surface requires ell == d-1");
            const Polytope p = convex_hull(cloud);
            return IVEstimate{ell, 0.5 * surface_area(p), 0.0, 0, IVMethod::ExactSurface};
        }
        case IVMethod::KubotaMC: {
            if (rs == nullptr) throw MethodMismatch("kubota-mc requires a random stream");
            std::vector<Subspace> subs;
            subs.reserve(static_cast<size_t>(params.n_subspaces));
            for (long long i = 0; i < params.n_subspaces; ++i) {
                subs.push_back(sample_subspace(d, ell, *rs));
            }
            return kubota_estimate(cloud, ell, subs);
        }
        case IVMethod::SupportMC: {
            if (ell != 1) throw MethodMismatch("support-mc requires ell == 1");
            if (rs == nullptr) throw MethodMismatch("support-mc requires a random stream");
            return v1_support_estimate(cloud, params.n_directions, *rs);
        }
    }
    throw MethodMismatch("intrinsic_volume: unknown method");
}

double local_functional(std::span<const double> z, const PointCloud& F,
                        const CircularCone& cone, int ell,
                        std::span<const Subspace> subspaces) {
    const int d = F.dim;
    if (static_cast<int>(z.size()) != d) {
        throw DimensionMismatch("local_functional: z dimension mismatch");
    }
    if (subspaces.empty()) throw TooFewSamples("local_functional: empty subspace list");
    PointCloud joined(d);
    joined.xs.reserve((F.size() + 1) * static_cast<size_t>(d));
    joined.push(z);
    joined.xs.insert(joined.xs.end(), F.xs.begin(), F.xs.end());

    const double pref = kubota_prefactor(d, ell);
    ConvexHullBuilder builder;
    PointCloud proj(ell);
    double total = 0.0;
    for (const Subspace& L : subspaces) {
        if (L.dim_ambient != d || L.dim_sub != ell) {
            throw DimensionMismatch("local_functional: subspace dims do not match");
        }
        if (!subspace_meets_cone(L, cone)) continue;
        proj.xs.resize(joined.size() * static_cast<size_t>(ell));
        double* o = proj.xs.data();
        for (size_t i = 0; i < joined.size(); ++i, o += ell) {
            project_point(joined.point(i), L, o);
        }
        total += hull_volume_or_zero(proj, builder);
    }
    return pref * total / static_cast<double>(subspaces.size());
}

}  // namespace gplab
