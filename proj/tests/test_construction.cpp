#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "gplab/construction.hpp"
#include "gplab/errors.hpp"
#include "gplab/intrinsic.hpp"
#include "gplab/random.hpp"
#include "gplab/sampling.hpp"

using namespace gplab;

namespace {

// Is `dir` in the positive hull of the d generator rows?
bool in_positive_hull(const PointCloud& generators, std::span<const double> dir) {
    const int d = generators.dim;
    double m[kMaxDim * kMaxDim];
    for (int j = 0; j < d; ++j) {
        auto g = generators.point(static_cast<size_t>(j));
        for (int k = 0; k < d; ++k) m[k * d + j] = g[k];
    }
    const SquareLU lu = SquareLU::factor(m, d);
    double lam[kMaxDim];
    if (!lu.solve(dir.data(), lam)) return false;
    for (int k = 0; k < d; ++k) {
        if (lam[k] < -1e-9) return false;
    }
    return true;
}

// Unit direction at angle phi from `axis`, tilted toward a random
// orthogonal direction.
Vec direction_at_angle(const Vec& axis, double phi, int d, RandomStream& rs) {
    Vec w(static_cast<size_t>(d));
    for (;;) {
        for (auto& x : w) x = rs.gaussian();
        const double along = dot(w, axis);
        for (int k = 0; k < d; ++k) w[static_cast<size_t>(k)] -= along * axis[static_cast<size_t>(k)];
        if (normalize(w.data(), d, 1e-8)) break;
    }
    Vec u(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) {
        u[static_cast<size_t>(k)] =
            std::cos(phi) * axis[static_cast<size_t>(k)] + std::sin(phi) * w[static_cast<size_t>(k)];
    }
    return u;
}

SiteFrame canonical_site(int d, long long n, double c1 = 4.0, double c2 = 0.1) {
    const double r = radius_r(n);
    Vec y(static_cast<size_t>(d), 0.0);
    y[static_cast<size_t>(d) - 1] = r;
    return build_site(y, d, r, c1, c2);
}

}  // namespace

TEST_CASE("radius formula") {
    CHECK(radius_r(10000) == doctest::Approx(4.02496632751).epsilon(1e-10));
    CHECK(radius_r(1000000) == doctest::Approx(5.0005228928).epsilon(1e-10));
    CHECK(radius_r(3) == doctest::Approx(1.4502333432).epsilon(1e-10));
    CHECK_THROWS_AS(radius_r(2), InvalidN);
    CHECK_THROWS_AS(radius_r(0), InvalidN);
}

TEST_CASE("sphere packing: radii, spacing, and the 1-D arc oracle") {
    RandomStream rs(55, 0);
    const double r = radius_r(10000);
    const double c1 = 2.5;
    const auto pts = pack_sphere(2, r, c1, rs);
    for (const Vec& p : pts) CHECK(std::fabs(norm(p) - r) < 1e-9);
    for (size_t i = 0; i < pts.size(); ++i) {
        for (size_t j = i + 1; j < pts.size(); ++j) {
            CHECK(dist(pts[i], pts[j]) >= 2.0 * c1 - 1e-9);
        }
    }
    // Exhaustive arc packing: points at angular spacing alpha = 2 asin(c1/r)
    // fit floor(2 pi / alpha) times; any maximal packing has gaps < 2 alpha.
    const double alpha = 2.0 * std::asin(c1 / r);
    const long long max_count = static_cast<long long>(std::floor(2.0 * M_PI / alpha));
    const double min_count = M_PI / alpha;
    CHECK(static_cast<double>(pts.size()) > min_count - 1e-9);
    CHECK(static_cast<long long>(pts.size()) <= max_count);
    CHECK(std::llabs(static_cast<long long>(pts.size()) -
                     std::llround(M_PI * r / c1)) <= 2);
}

TEST_CASE("packing counts track the (log n)^((d-1)/2) law at d = 3") {
    RandomStream rs(55, 1);
    double m3 = 0.0, m5 = 0.0;
    for (int t = 0; t < 5; ++t) {
        m3 += static_cast<double>(pack_sphere(3, radius_r(1000), 1.0, rs).size());
        m5 += static_cast<double>(pack_sphere(3, radius_r(100000), 1.0, rs).size());
    }
    const double ratio = m5 / m3;
    const double law = std::log(1e5) / std::log(1e3);  // exponent (d-1)/2 = 1
    CHECK(ratio > 0.5 * law);
    CHECK(ratio < 2.0 * law);
}

TEST_CASE("oversized spacing still yields a single maximal point") {
    RandomStream rs(55, 2);
    // 2 c1 exceeds the sphere diameter, so one point is already maximal.
    const auto pts = pack_sphere(2, radius_r(1000), 4.0, rs);
    CHECK(pts.size() == 1);
    CHECK_THROWS_AS(pack_sphere(2, -1.0, 1.0, rs), NonPositiveValue);
    CHECK_THROWS_AS(pack_sphere(2, 1.0, 0.0, rs), NonPositiveValue);
}

TEST_CASE("site frame invariants across dimensions") {
    for (int d = 2; d <= 4; ++d) {
        const long long n = 10000;
        const SiteFrame site = canonical_site(d, n);
        const double r = site.r;

        CHECK(std::fabs(dist(site.y, site.y0) - 1.0 / r) < 1e-9);
        for (int j = 0; j < d; ++j) {
            CHECK(std::fabs(dist(site.ys.point(static_cast<size_t>(j)), site.y) -
                            std::sqrt(2.0)) < 1e-9);
        }
        // regular: all pairwise distances between tangent vertices equal
        if (d >= 3) {
            const double ref = dist(site.ys.point(0), site.ys.point(1));
            for (int i = 0; i < d; ++i) {
                for (int j = i + 1; j < d; ++j) {
                    CHECK(std::fabs(dist(site.ys.point(static_cast<size_t>(i)),
                                         site.ys.point(static_cast<size_t>(j))) -
                                    ref) < 1e-9);
                }
            }
        }
        // homothets sit inside Delta and have volume c2^d vol(Delta)
        const SimplexMembership delta_member(site.delta);
        const double vol = simplex_volume(site.delta);
        for (int j = 0; j <= d; ++j) {
            const Simplex& hj = site.delta_j[static_cast<size_t>(j)];
            for (int t = 0; t <= d; ++t) CHECK(delta_member.contains(hj.vertex(t), 1e-9));
            CHECK(simplex_volume(hj) ==
                  doctest::Approx(std::pow(site.c2, d) * vol).epsilon(1e-12));
        }
        // Delta lies inside the far tangent half-space
        for (int t = 0; t <= d; ++t) CHECK(site.h_plus.contains(site.delta.vertex(t)));
        // w is the centre of the base facet of the apex homothet
        Vec base_centre(static_cast<size_t>(d), 0.0);
        for (int j = 1; j <= d; ++j) {
            auto v = site.delta_j[0].vertex(j);
            for (int k = 0; k < d; ++k) base_centre[static_cast<size_t>(k)] += v[k] / d;
        }
        CHECK(dist(base_centre, site.w) < 1e-9);
    }
}

TEST_CASE("the area of the 2-D simplex is sqrt(2)/r") {
    const long long n = 10000;
    const SiteFrame site = canonical_site(2, n);
    // determinant route and base-times-height route
    const double by_det = simplex_volume(site.delta);
    const double base = dist(site.ys.point(0), site.ys.point(1));
    const double height = dist(site.y, site.y0);
    CHECK(base == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(by_det == doctest::Approx(0.5 * base * height).epsilon(1e-9));
    CHECK(by_det == doctest::Approx(std::sqrt(2.0) / site.r).epsilon(1e-9));
    CHECK(by_det == doctest::Approx(0.351360346224).epsilon(1e-9));  // sqrt(2)/r(1e4)
}

TEST_CASE("homothet volume follows the (log n)^(-1/2) law") {
    double lo = 1e300, hi = 0.0;
    for (long long n : {1000LL, 10000LL, 100000LL, 1000000LL}) {
        const SiteFrame site = canonical_site(2, n);
        const double v = simplex_volume(site.delta_j[0]) * std::sqrt(std::log(double(n)));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi / lo < 2.0);
}

TEST_CASE("separating half-spaces touch and separate as stated") {
    for (int d = 2; d <= 4; ++d) {
        for (double c2 : {0.1, 0.2}) {
            const SiteFrame site = canonical_site(d, 10000, 4.0, c2);
            REQUIRE(static_cast<int>(site.h_side.size()) == d);
            for (int j = 1; j <= d; ++j) {
                const HalfSpace& h = site.h_side[static_cast<size_t>(j - 1)];
                CHECK(std::fabs(norm(h.normal) - 1.0) < 1e-12);
                // touching the apex homothet from outside
                double mn0 = 1e300;
                for (int t = 0; t <= d; ++t) {
                    mn0 = std::min(mn0, dot(h.normal, site.delta_j[0].vertex(t)));
                }
                CHECK(std::fabs(mn0 - h.offset) <= 1e-7);
                // containing and touching every base homothet except j
                for (int k = 1; k <= d; ++k) {
                    double mx = -1e300, mn = 1e300;
                    for (int t = 0; t <= d; ++t) {
                        const double s = dot(h.normal, site.delta_j[static_cast<size_t>(k)].vertex(t));
                        mx = std::max(mx, s);
                        mn = std::min(mn, s);
                    }
                    if (k == j) {
                        CHECK(mn > h.offset + 1e-9);  // strictly excluded
                    } else {
                        CHECK(std::fabs(mx - h.offset) <= 1e-7);  // touches
                        CHECK(mx <= h.offset + 1e-7);             // contained
                    }
                }
                // the half-space excludes the origin
                CHECK(h.offset < 0.0);
            }
            // the shell radius stays near r at small c2, which is what the
            // tail-restricted event evaluation relies on
            if (c2 == 0.1 || d == 2) {
                CHECK(tail_evaluation_valid(site));
                CHECK(event_shell_radius(site) > site.r - 1.0);
            }
        }
    }
}

TEST_CASE("construction fails outside the valid constant range") {
    // overlapping homothets
    CHECK_THROWS_AS(canonical_site(2, 10000, 4.0, 0.9), ConstructionFailure);
    // no origin-excluding common tangent once c2 passes ~1/3
    CHECK_THROWS_AS(canonical_site(2, 10000, 4.0, 0.45), ConstructionFailure);
}

TEST_CASE("internal cone sandwich from the tangent geometry") {
    RandomStream rs(55, 3);
    for (int d : {2, 3, 4}) {
        const SiteFrame site = canonical_site(d, 10000);
        const double r = site.r;
        Vec axis = sub(site.y, site.y0);
        normalize(axis.data(), d);
        const double inner = std::atan(std::sqrt(2.0) * r / (d - 1));
        const double outer = std::atan(std::sqrt(2.0) * r);
        for (int t = 0; t < 10000; ++t) {
            const double phi_in = rs.uniform(0.0, inner - 1e-3);
            CHECK(in_positive_hull(site.d_generators,
                                   direction_at_angle(axis, phi_in, d, rs)));
            const double phi_out = rs.uniform(outer + 1e-3, std::min(outer + 0.3, M_PI));
            CHECK(!in_positive_hull(site.d_generators,
                                    direction_at_angle(axis, phi_out, d, rs)));
        }
    }
}

TEST_CASE("canonical-point cone sandwich") {
    RandomStream rs(55, 4);
    for (int d : {2, 3}) {
        const SiteFrame site = canonical_site(d, 10000);
        PointCloud z_gens(d);
        for (int j = 1; j <= d; ++j) {
            z_gens.push(sub(site.z.point(static_cast<size_t>(j)), site.z.point(0)));
        }
        const Vec& axis = site.cone_inner.axis;
        for (int t = 0; t < 10000; ++t) {
            const double phi_in = rs.uniform(0.0, site.cone_inner.half_angle - 1e-3);
            CHECK(in_positive_hull(z_gens, direction_at_angle(axis, phi_in, d, rs)));
            const double phi_out = rs.uniform(site.cone_outer.half_angle + 1e-3,
                                              std::min(site.cone_outer.half_angle + 0.3, M_PI));
            CHECK(!in_positive_hull(z_gens, direction_at_angle(axis, phi_out, d, rs)));
        }
    }
}

TEST_CASE("cone containment audit") {
    RandomStream rs(55, 5);
    // defaults: no violations expected
    const Scaffold good = build_scaffold(10000, 2, 4.0, 0.1, rs);
    const ConeContainmentReport ok = check_cone_containment(good);
    CHECK(ok.ok());
    if (good.m() > 1) CHECK(ok.checks > 0);

    // single site: vacuously true
    const Scaffold single = build_scaffold(1000, 2, 4.0, 0.1, rs);
    CHECK(single.m() == 1);
    CHECK(check_cone_containment(single).ok());

    // tightly packed sites break the containment
    const Scaffold bad = build_scaffold(10000, 2, 0.3, 0.1, rs);
    REQUIRE(bad.m() > 2);
    CHECK(!check_cone_containment(bad).ok());
}

TEST_CASE("event indicator on synthetic clouds") {
    const SiteFrame site = canonical_site(2, 10000, 4.0, 0.25);
    const int d = site.dim;

    PointCloud centroids(d);
    for (int j = 0; j <= d; ++j) centroids.push(site.z.point(static_cast<size_t>(j)));
    CHECK(event_indicator(centroids, site));

    PointCloud with_extra = centroids;
    with_extra.push(scaled(site.y, 2.0));  // far inside the tangent half-space
    CHECK(!event_indicator(with_extra, site));

    PointCloud missing(d);
    for (int j = 1; j <= d; ++j) missing.push(site.z.point(static_cast<size_t>(j)));
    CHECK(!event_indicator(missing, site));

    // points away from the sphere shell never matter
    PointCloud with_noise = centroids;
    RandomStream rs(55, 6);
    for (int i = 0; i < 100; ++i) {
        const double p[2] = {0.2 * rs.gaussian(), 0.2 * rs.gaussian()};
        with_noise.push(p);
    }
    CHECK(event_indicator(with_noise, site));

    // tail evaluation sees exactly the same answer
    PointCloud tail(d);
    for (size_t i = 0; i < with_noise.size(); ++i) {
        if (norm2(with_noise.point(i)) >= site.r * site.r) tail.push(with_noise.point(i));
    }
    CHECK(event_indicator_tail(tail, site) == event_indicator(with_noise, site));
}

TEST_CASE("event probability report is internally consistent") {
    RandomStream rs(55, 7);
    const EventAuditReport rep = estimate_event_probability(1000, 2, 4.0, 0.25, 50, rs);
    CHECK(rep.m == 1);
    CHECK(rep.reps == 50);
    CHECK(rep.pooled_estimate >= 0.0);
    CHECK(rep.pooled_estimate <= 1.0);
    CHECK(rep.pooled_ci.hi >= rep.pooled_ci.lo);
    CHECK(rep.gamma_delta.value > 0.0);
    const double n_gamma = rep.gamma_delta.value * 1000.0;
    CHECK(n_gamma > 1.0 / 20.0);
    CHECK(n_gamma < 20.0);
    CHECK(rep.gamma_delta_j.size() == 3);
    for (const MCEstimate& e : rep.gamma_delta_j) CHECK(e.value > 0.0);
    REQUIRE(rep.local_variance.size() == 2);  // ell = 1, 2
    for (const LocalVarianceEstimate& lv : rep.local_variance) CHECK(lv.variance > 0.0);
}

TEST_CASE("apex regions: anchors, separation, admissible subspaces") {
    const SiteFrame site = canonical_site(2, 10000);
    const ApexRegions regions(site, 1);

    CHECK(regions.in_r1(site.w1));
    CHECK(regions.in_r2(site.w2));

    RandomStream rs(55, 8);
    long long in1 = 0, in2 = 0;
    double x[2];
    for (int i = 0; i < 100000; ++i) {
        uniform_in_simplex(site.delta_j[0], rs, x);
        const std::span<const double> xs(x, 2);
        const bool a = regions.in_r1(xs);
        const bool b = regions.in_r2(xs);
        CHECK(!(a && b));  // separated by the hyperplane through w2
        in1 += a;
        in2 += b;
    }
    // both regions carry a constant fraction of the apex homothet
    CHECK(in1 > 1000);
    CHECK(in2 > 1000);

    const Subspace L = regions.sample_admissible_subspace(rs);
    CHECK(regions.admissible(L));
    CHECK(angle_to_subspace(regions.polar_cone().axis, L) < regions.polar_cone().half_angle);
}

TEST_CASE("the wedge G sits inside the apex homothet and behaves as stated") {
    const SiteFrame site = canonical_site(2, 10000);
    const ApexRegions regions(site, 1);
    RandomStream rs(55, 9);
    const Subspace L = regions.sample_admissible_subspace(rs);
    const auto g = regions.make_g_region(L);

    CHECK(g.contains(site.w2));

    const SimplexMembership apex_member(site.delta_j[0]);

    // Sample G directly: x = w1 + t * dir with dir in the outer cone and t
    // up to the hyperplane. Everything must stay inside the apex homothet.
    std::vector<Vec> g_points;
    for (int i = 0; i < 5000; ++i) {
        const double phi = rs.uniform(0.0, site.cone_outer.half_angle - 1e-6);
        const Vec dir = direction_at_angle(site.cone_outer.axis, phi, 2, rs);
        const double de = dot(dir, g.e1);
        if (de >= -1e-12) continue;  // admissibility makes this negative
        const double t_max = (g.threshold - dot(site.w1, g.e1)) / de;
        REQUIRE(t_max > 0.0);
        const double t = rs.uniform01() * t_max;
        Vec xx = add(site.w1, scaled(dir, t));
        CHECK(g.contains(xx));
        CHECK(apex_member.contains(xx, 1e-7));
        g_points.push_back(std::move(xx));
    }
    REQUIRE(g_points.size() > 1000);

    // Z1 in R1 and Z2 in R2 via restricted rejection sampling.
    const RestrictedGaussianSampler sampler(site.delta_j[0]);
    const auto draw_in = [&](auto member) {
        for (int t = 0; t < 100000; ++t) {
            Vec z = sampler.sample(rs);
            if (member(z)) return z;
        }
        throw RejectionBudgetExceeded("test: region never hit");
    };
    const Vec z1 = draw_in([&](const Vec& v) { return regions.in_r1(v); });
    const Vec z2 = draw_in([&](const Vec& v) { return regions.in_r2(v); });

    PointCloud hull1(2), hull2(2);
    hull1.push(z1);
    hull2.push(z2);
    for (int j = 1; j <= 2; ++j) {
        hull1.push(site.z.point(static_cast<size_t>(j)));
        hull2.push(site.z.point(static_cast<size_t>(j)));
    }
    const Polytope p1 = convex_hull(hull1);
    const Polytope p2 = convex_hull(hull2);
    long long in_p1 = 0, in_p2_far = 0;
    for (const Vec& xx : g_points) {
        if (contains_point(p1, xx, 1e-7)) ++in_p1;
        if (dist(xx, site.w2) > 1e-3 && contains_point(p2, xx, 1e-9)) ++in_p2_far;
    }
    CHECK(in_p1 == static_cast<long long>(g_points.size()));  // G inside [Z1, F]
    CHECK(in_p2_far == 0);                                    // G meets [Z2, F] only near w2
}

TEST_CASE("plain MC on the big simplex matches the importance-sampled oracle") {
    const long long n = 10000;
    const SiteFrame site = canonical_site(2, n);
    const SimplexMembership member(site.delta);
    RandomStream rs(55, 15);
    const auto inside = [&](std::span<const double> x) { return member.contains(x); };
    const MCEstimate plain = estimate_gaussian_measure(2, inside, 2000000, rs);
    const double scaled_mass = plain.value * static_cast<double>(n);
    CHECK(scaled_mass > 1.0 / 20.0);
    CHECK(scaled_mass < 20.0);
    const MCEstimate oracle = gaussian_measure_simplex(site.delta, 100000, rs);
    const double se = std::sqrt(plain.std_error * plain.std_error +
                                oracle.std_error * oracle.std_error);
    CHECK(std::fabs(plain.value - oracle.value) <= 4.0 * se);
}

TEST_CASE("the cone-capped regions keep Gaussian mass of order 1/n") {
    RandomStream rs(55, 14);
    double lo1 = 1e300, hi1 = 0.0, lo2 = 1e300, hi2 = 0.0;
    for (long long n : {1000LL, 10000LL, 100000LL, 1000000LL}) {
        const SiteFrame site = canonical_site(2, n);
        const ApexRegions regions(site, 1);
        // gamma(R^k) = gamma(Delta^0) * P(Z in R^k) for Z ~ gamma restricted
        const MCEstimate mass0 = gaussian_measure_simplex(site.delta_j[0], 100000, rs);
        const RestrictedGaussianSampler sampler(site.delta_j[0]);
        long long in1 = 0, in2 = 0;
        const int draws = 20000;
        for (int i = 0; i < draws; ++i) {
            const Vec z = sampler.sample(rs);
            if (regions.in_r1(z)) ++in1;
            if (regions.in_r2(z)) ++in2;
        }
        const double g1 = mass0.value * in1 / draws * static_cast<double>(n);
        const double g2 = mass0.value * in2 / draws * static_cast<double>(n);
        lo1 = std::min(lo1, g1);
        hi1 = std::max(hi1, g1);
        lo2 = std::min(lo2, g2);
        hi2 = std::max(hi2, g2);
    }
    // n * gamma(R^k) stays in a fixed band across the grid
    CHECK(lo1 > 1e-5);
    CHECK(hi1 / lo1 < 3.0);
    CHECK(lo2 > 1e-5);
    CHECK(hi2 / lo2 < 3.0);
}

TEST_CASE("projected wedge length stays of order (log n)^(-1/2)") {
    RandomStream rs(55, 10);
    double min_ratio = 1e300;
    for (long long n : {1000LL, 10000LL, 100000LL, 1000000LL}) {
        const SiteFrame site = canonical_site(2, n);
        const ApexRegions regions(site, 1);
        for (int trial = 0; trial < 10; ++trial) {
            const Subspace L = regions.sample_admissible_subspace(rs);
            const auto g = regions.make_g_region(L);
            double lo = 1e300, hi = -1e300;
            int kept = 0;
            for (int i = 0; i < 4000; ++i) {
                const double phi = rs.uniform(0.0, site.cone_outer.half_angle - 1e-6);
                const Vec dir = direction_at_angle(site.cone_outer.axis, phi, 2, rs);
                const double de = dot(dir, g.e1);
                if (de >= -1e-12) continue;
                const double t_max = (g.threshold - dot(site.w1, g.e1)) / de;
                const Vec xx = add(site.w1, scaled(dir, rs.uniform01() * t_max));
                double proj[1];
                project_point(xx, L, proj);
                lo = std::min(lo, proj[0]);
                hi = std::max(hi, proj[0]);
                ++kept;
            }
            REQUIRE(kept > 500);
            min_ratio = std::min(min_ratio, (hi - lo) * std::sqrt(std::log(double(n))));
        }
    }
    CHECK(min_ratio > 0.01);  // desk-scale stand-in for the implicit constant
}

TEST_CASE("local variance estimates") {
    RandomStream rs(55, 11);
    const SiteFrame site = canonical_site(2, 10000);

    // degenerate hook: a pinned Z gives zero variance
    const Vec pinned(site.z.point(0).begin(), site.z.point(0).end());
    const LocalVarianceEstimate zero =
        local_variance_estimate(site, 1, 50, 100, rs, pinned.data());
    CHECK(zero.variance == doctest::Approx(0.0));

    CHECK_THROWS_AS(local_variance_estimate(site, 1, 1, 10, rs), TooFewSamples);

    // ell = d: V * log n stays in a fixed band across the grid
    double lo = 1e300, hi = 0.0;
    for (long long n : {1000LL, 10000LL, 100000LL, 1000000LL}) {
        const SiteFrame s = canonical_site(2, n);
        RandomStream lrs(55, 200 + static_cast<std::uint64_t>(n % 1000));
        const LocalVarianceEstimate lv = local_variance_estimate(s, 2, 1500, 1, lrs);
        CHECK(lv.variance > 0.0);
        const double scaled_v = lv.variance * std::log(static_cast<double>(n));
        lo = std::min(lo, scaled_v);
        hi = std::max(hi, scaled_v);
    }
    CHECK(hi / lo < 4.0);
}

TEST_CASE("paired local functionals are monotone across the separating plane") {
    RandomStream rs(55, 12);
    const SiteFrame site = canonical_site(2, 10000);
    const ApexRegions regions(site, 1);
    const RestrictedGaussianSampler sampler(site.delta_j[0]);
    std::vector<Subspace> subs;
    for (int i = 0; i < 400; ++i) subs.push_back(sample_subspace(2, 1, rs));
    const PointCloud f = site_base_points(site);

    const auto draw_in = [&](auto member) {
        for (int t = 0; t < 200000; ++t) {
            Vec z = sampler.sample(rs);
            if (member(z)) return z;
        }
        throw RejectionBudgetExceeded("test: region never hit");
    };
    for (int pair = 0; pair < 100; ++pair) {
        const Vec z1 = draw_in([&](const Vec& v) { return regions.in_r1(v); });
        const Vec z2 = draw_in([&](const Vec& v) { return regions.in_r2(v); });
        const double v1 = local_functional(z1, f, site.cone_outer, 1, subs);
        const double v2 = local_functional(z2, f, site.cone_outer, 1, subs);
        CHECK(v1 >= v2 - 1e-12);
    }
}

TEST_CASE("scaffold serialization round-trips bit for bit") {
    RandomStream rs(55, 13);
    const Scaffold s = build_scaffold(10000, 3, 4.0, 0.1, rs);
    const std::string path = "/tmp/gplab_scaffold_test.txt";
    save_scaffold(s, path);
    const Scaffold t = load_scaffold(path);
    REQUIRE(t.m() == s.m());
    CHECK(t.n == s.n);
    CHECK(t.d == s.d);
    CHECK(t.r == s.r);
    for (size_t i = 0; i < s.m(); ++i) {
        CHECK(t.sites[i].y == s.sites[i].y);
        CHECK(t.sites[i].y0 == s.sites[i].y0);
        CHECK(t.sites[i].ys.xs == s.sites[i].ys.xs);
        CHECK(t.sites[i].z.xs == s.sites[i].z.xs);
        CHECK(t.sites[i].w1 == s.sites[i].w1);
        CHECK(t.sites[i].w2 == s.sites[i].w2);
        REQUIRE(t.sites[i].h_side.size() == s.sites[i].h_side.size());
        for (size_t j = 0; j < s.sites[i].h_side.size(); ++j) {
            CHECK(t.sites[i].h_side[j].normal == s.sites[i].h_side[j].normal);
            CHECK(t.sites[i].h_side[j].offset == s.sites[i].h_side[j].offset);
        }
    }
    std::remove(path.c_str());
}
