#include "gplab/grassmann.hpp"

#include <algorithm>
#include <cmath>

#include "gplab/errors.hpp"
#include "gplab/stats.hpp"

namespace gplab {

bool CircularCone::contains_direction(std::span<const double> u, double tol) const {
    const double nu = norm(u);
    if (nu < 1e-300) return true;  // the zero direction belongs to every cone
    const double c = dot(u, axis) / nu;
    const double ang = std::acos(std::clamp(c, -1.0, 1.0));
    return ang <= half_angle + tol;
}

bool CircularCone::contains_point(std::span<const double> x, double tol) const {
    const Vec u = sub(x, apex);
    return contains_direction(u, tol);
}

Subspace sample_subspace(int d, int l, RandomStream& rs) {
    if (d < 1 || d > kMaxDim || l < 1 || l > d) {
        throw InvalidDimension("sample_subspace: need 1 <= l <= d <= 8");
    }
    Subspace s;
    s.dim_ambient = d;
    s.dim_sub = l;
    s.basis.resize(static_cast<size_t>(l) * d);
    for (;;) {
        for (auto& x : s.basis) x = rs.gaussian();
        if (gram_schmidt(s.basis.data(), l, d) == l) break;
        // Rank deficiency has probability zero; resample.
    }
    // Sign convention for reproducibility.
    for (int k = 0; k < l; ++k) {
        double* v = s.basis.data() + static_cast<size_t>(k) * d;
        for (int i = 0; i < d; ++i) {
            if (std::fabs(v[i]) > 1e-12) {
                if (v[i] < 0.0) {
                    for (int j = 0; j < d; ++j) v[j] = -v[j];
                }
                break;
            }
        }
    }
    return s;
}

void project_point(std::span<const double> x, const Subspace& L, double* out) {
    for (int k = 0; k < L.dim_sub; ++k) out[k] = dot(x, L.basis_vec(k));
}

PointCloud project_cloud(const PointCloud& cloud, const Subspace& L) {
    if (cloud.dim != L.dim_ambient) {
        throw DimensionMismatch("project_cloud: ambient dimensions differ");
    }
    PointCloud out(L.dim_sub);
    out.xs.resize(cloud.size() * static_cast<size_t>(L.dim_sub));
    double* o = out.xs.data();
    for (size_t i = 0; i < cloud.size(); ++i, o += L.dim_sub) {
        project_point(cloud.point(i), L, o);
    }
    return out;
}

double angle_to_subspace(std::span<const double> z, const Subspace& L) {
    const double nz = norm(z);
    if (nz < 1e-300) throw ZeroVector("angle_to_subspace: zero vector");
    double p2 = 0.0;
    for (int k = 0; k < L.dim_sub; ++k) {
        const double c = dot(z, L.basis_vec(k));
        p2 += c * c;
    }
    const double ratio = std::clamp(std::sqrt(p2) / nz, 0.0, 1.0);
    return std::acos(ratio);
}

bool subspace_meets_cone(const Subspace& L, const CircularCone& c) {
    return angle_to_subspace(c.axis, L) <= c.half_angle + kAngleTol;
}

MCEstimate cap_measure_estimate(std::span<const double> z, double a, int d, int l,
                                long long samples, RandomStream& rs) {
    if (!(a > 0.0 && a < M_PI / 2.0)) {
        throw InvalidAngle("cap_measure_estimate: need 0 < a < pi/2");
    }
    if (samples < 1) throw TooFewSamples("cap_measure_estimate: need samples >= 1");
    long long hits = 0;
    for (long long i = 0; i < samples; ++i) {
        const Subspace L = sample_subspace(d, l, rs);
        if (angle_to_subspace(z, L) <= a) ++hits;
    }
    MCEstimate e;
    e.n_samples = samples;
    e.value = static_cast<double>(hits) / static_cast<double>(samples);
    e.std_error = binomial_std_error(e.value, samples);
    return e;
}

}  // namespace gplab
