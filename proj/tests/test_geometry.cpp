#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "gplab/errors.hpp"
#include "gplab/geometry.hpp"
#include "gplab/grassmann.hpp"
#include "gplab/random.hpp"

using namespace gplab;

namespace {

PointCloud cloud_from(int d, std::initializer_list<std::initializer_list<double>> pts) {
    PointCloud c(d);
    for (const auto& p : pts) c.push(std::vector<double>(p));
    return c;
}

PointCloud unit_cube_cloud() {
    PointCloud c(3);
    for (int i = 0; i < 8; ++i) {
        const double p[3] = {static_cast<double>(i & 1), static_cast<double>((i >> 1) & 1),
                             static_cast<double>((i >> 2) & 1)};
        c.push(p);
    }
    return c;
}

std::set<std::vector<double>> vertex_set(const Polytope& p) {
    std::set<std::vector<double>> s;
    for (size_t i = 0; i < p.vertex_count(); ++i) {
        auto v = p.vertex(i);
        s.insert(std::vector<double>(v.begin(), v.end()));
    }
    return s;
}

// Independent oracle: q is a convex combination of other points iff some
// (d+1)-subset of them contains q (Caratheodory). Exhaustive enumeration.
bool in_hull_of_others_bruteforce(const PointCloud& cloud, size_t q) {
    const int d = cloud.dim;
    std::vector<size_t> others;
    for (size_t i = 0; i < cloud.size(); ++i) {
        if (i != q) others.push_back(i);
    }
    std::vector<int> pick(static_cast<size_t>(d) + 1, 0);
    const auto point_in_simplex = [&](const std::vector<size_t>& ids) {
        Simplex s;
        s.dim = d;
        for (size_t id : ids) {
            auto v = cloud.point(id);
            s.vs.insert(s.vs.end(), v.begin(), v.end());
        }
        const SimplexMembership m(s);
        if (!m.valid()) return false;
        return m.contains(cloud.point(q), 1e-12);
    };
    // enumerate (d+1)-subsets of `others`
    std::vector<size_t> ids(static_cast<size_t>(d) + 1);
    std::function<bool(size_t, size_t)> rec = [&](size_t start, size_t depth) {
        if (depth == ids.size()) return point_in_simplex(ids);
        for (size_t i = start; i < others.size(); ++i) {
            ids[depth] = others[i];
            if (rec(i + 1, depth + 1)) return true;
        }
        return false;
    };
    return rec(0, 0);
}

}  // namespace

TEST_CASE("square plus centre keeps exactly the four corners") {
    const PointCloud c = cloud_from(2, {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}});
    const Polytope p = convex_hull(c);
    CHECK(p.vertex_count() == 4);
    const auto vs = vertex_set(p);
    CHECK(vs.count({0, 0}) == 1);
    CHECK(vs.count({1, 0}) == 1);
    CHECK(vs.count({1, 1}) == 1);
    CHECK(vs.count({0, 1}) == 1);
}

TEST_CASE("d+1 affinely independent points give a simplex with d+1 facets") {
    for (int d = 2; d <= 5; ++d) {
        PointCloud c(d);
        std::vector<double> origin(d, 0.0);
        c.push(origin);
        for (int k = 0; k < d; ++k) {
            std::vector<double> e(d, 0.0);
            e[static_cast<size_t>(k)] = 1.0;
            c.push(e);
        }
        const Polytope p = convex_hull(c);
        CHECK(p.vertex_count() == static_cast<size_t>(d) + 1);
        CHECK(p.facets.size() == static_cast<size_t>(d) + 1);
    }
}

TEST_CASE("gaussian cloud vertices match the brute-force oracle") {
    RandomStream rs(2024, 0);
    PointCloud c(2);
    for (int i = 0; i < 100; ++i) {
        const double p[2] = {rs.gaussian(), rs.gaussian()};
        c.push(p);
    }
    const Polytope p = convex_hull(c);
    const auto vs = vertex_set(p);
    for (size_t i = 0; i < c.size(); ++i) {
        auto pt = c.point(i);
        const bool hull_vertex = vs.count(std::vector<double>(pt.begin(), pt.end())) == 1;
        const bool interior = in_hull_of_others_bruteforce(c, i);
        CHECK(hull_vertex == !interior);
    }
}

TEST_CASE("brute-force equivalence for small clouds in d <= 3") {
    for (int d = 2; d <= 3; ++d) {
        for (int trial = 0; trial < 4; ++trial) {
            RandomStream rs(31, static_cast<std::uint64_t>(d * 10 + trial));
            PointCloud c(d);
            for (int i = 0; i < 12; ++i) {
                std::vector<double> p(static_cast<size_t>(d));
                for (auto& x : p) x = rs.gaussian();
                c.push(p);
            }
            const Polytope p = convex_hull(c);
            const auto vs = vertex_set(p);
            for (size_t i = 0; i < c.size(); ++i) {
                auto pt = c.point(i);
                const bool hull_vertex = vs.count(std::vector<double>(pt.begin(), pt.end())) == 1;
                CHECK(hull_vertex == !in_hull_of_others_bruteforce(c, i));
            }
        }
    }
}

TEST_CASE("volumes of reference bodies") {
    const Polytope cube = convex_hull(unit_cube_cloud());
    CHECK(polytope_volume(cube) == doctest::Approx(1.0).epsilon(1e-9));

    const PointCloud simplex = cloud_from(3, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    CHECK(polytope_volume(convex_hull(simplex)) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("surface areas of reference bodies") {
    const Polytope cube = convex_hull(unit_cube_cloud());
    CHECK(surface_area(cube) == doctest::Approx(6.0).epsilon(1e-9));

    const PointCloud square = cloud_from(2, {{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    CHECK(surface_area(convex_hull(square)) == doctest::Approx(4.0).epsilon(1e-9));

    const PointCloud tri = cloud_from(2, {{0, 0}, {1, 0}, {0, 1}});
    CHECK(surface_area(convex_hull(tri)) ==
          doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("homogeneity of volume and surface") {
    RandomStream rs(5, 77);
    for (int d = 2; d <= 4; ++d) {
        PointCloud c(d);
        for (int i = 0; i < 30; ++i) {
            std::vector<double> p(static_cast<size_t>(d));
            for (auto& x : p) x = rs.gaussian();
            c.push(p);
        }
        const Polytope base = convex_hull(c);
        const double v = polytope_volume(base);
        const double s = surface_area(base);
        for (double scale : {0.5, 2.0, 3.0}) {
            PointCloud cs(d);
            cs.xs = c.xs;
            for (auto& x : cs.xs) x *= scale;
            const Polytope ps = convex_hull(cs);
            CHECK(polytope_volume(ps) ==
                  doctest::Approx(v * std::pow(scale, d)).epsilon(1e-9));
            CHECK(surface_area(ps) ==
                  doctest::Approx(s * std::pow(scale, d - 1)).epsilon(1e-9));
        }
    }
}

TEST_CASE("rigid motion invariance") {
    RandomStream rs(6, 1);
    for (int d = 2; d <= 4; ++d) {
        PointCloud c(d);
        for (int i = 0; i < 40; ++i) {
            std::vector<double> p(static_cast<size_t>(d));
            for (auto& x : p) x = rs.gaussian();
            c.push(p);
        }
        const double v = polytope_volume(convex_hull(c));
        const double s = surface_area(convex_hull(c));

        const Subspace rot = sample_subspace(d, d, rs);  // orthogonal matrix rows
        std::vector<double> shift(static_cast<size_t>(d));
        for (auto& x : shift) x = rs.gaussian();
        PointCloud moved(d);
        for (size_t i = 0; i < c.size(); ++i) {
            std::vector<double> q(static_cast<size_t>(d));
            project_point(c.point(i), rot, q.data());
            for (int k = 0; k < d; ++k) q[static_cast<size_t>(k)] += shift[static_cast<size_t>(k)];
            moved.push(q);
        }
        CHECK(polytope_volume(convex_hull(moved)) == doctest::Approx(v).epsilon(1e-8));
        CHECK(surface_area(convex_hull(moved)) == doctest::Approx(s).epsilon(1e-8));
    }
}

TEST_CASE("monotonicity under adding points") {
    RandomStream rs(9, 3);
    for (int d = 2; d <= 3; ++d) {
        for (int trial = 0; trial < 5; ++trial) {
            PointCloud c(d);
            for (int i = 0; i < 20; ++i) {
                std::vector<double> p(static_cast<size_t>(d));
                for (auto& x : p) x = rs.gaussian();
                c.push(p);
            }
            const double v0 = polytope_volume(convex_hull(c));
            const double s0 = surface_area(convex_hull(c));
            std::vector<double> extra(static_cast<size_t>(d));
            for (auto& x : extra) x = rs.gaussian();
            c.push(extra);
            const double v1 = polytope_volume(convex_hull(c));
            const double s1 = surface_area(convex_hull(c));
            CHECK(v1 >= v0 - 1e-12);
            CHECK(s1 >= s0 - 1e-12);
        }
    }
}

TEST_CASE("idempotence of the hull on its own vertices") {
    RandomStream rs(10, 4);
    for (int d = 2; d <= 4; ++d) {
        PointCloud c(d);
        for (int i = 0; i < 60; ++i) {
            std::vector<double> p(static_cast<size_t>(d));
            for (auto& x : p) x = rs.gaussian();
            c.push(p);
        }
        const Polytope p1 = convex_hull(c);
        const Polytope p2 = convex_hull(p1.vertex_cloud());
        CHECK(vertex_set(p1) == vertex_set(p2));
    }
    const Polytope cube1 = convex_hull(unit_cube_cloud());
    const Polytope cube2 = convex_hull(cube1.vertex_cloud());
    CHECK(vertex_set(cube1) == vertex_set(cube2));
    CHECK(cube2.vertex_count() == 8);
}

TEST_CASE("polytope facet invariants hold") {
    RandomStream rs(12, 8);
    PointCloud c(3);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> p(3);
        for (auto& x : p) x = rs.gaussian();
        c.push(p);
    }
    const Polytope p = convex_hull(c);
    for (const Facet& f : p.facets) {
        CHECK(std::fabs(norm(f.normal) - 1.0) < 1e-12);
        int on_plane = 0;
        for (size_t i = 0; i < p.vertex_count(); ++i) {
            const double s = dot(f.normal, p.vertex(i)) - f.offset;
            CHECK(s <= kGeomTol);
            if (std::fabs(s) <= kGeomTol) ++on_plane;
        }
        CHECK(on_plane >= p.dim);
    }
    // every input point lies inside all facet half-spaces
    for (size_t i = 0; i < c.size(); ++i) CHECK(contains_point(p, c.point(i)));
}

TEST_CASE("degenerate inputs are reported") {
    PointCloud flat(3);
    RandomStream rs(13, 0);
    for (int i = 0; i < 10; ++i) {
        const double p[3] = {rs.gaussian(), rs.gaussian(), 0.0};
        flat.push(p);
    }
    CHECK_THROWS_AS(convex_hull(flat), DegenerateInput);

    PointCloud few(2);
    const double p0[2] = {0, 0}, p1[2] = {1, 0};
    few.push(p0);
    few.push(p1);
    CHECK_THROWS_AS(convex_hull(few), DegenerateInput);
}

TEST_CASE("one-dimensional hulls") {
    PointCloud c(1);
    for (double x : {0.3, -1.25, 2.5, 0.0, 2.0}) c.push(std::vector<double>{x});
    const Polytope p = convex_hull(c);
    CHECK(p.vertex_count() == 2);
    CHECK(polytope_volume(p) == doctest::Approx(3.75));
    CHECK(surface_area(p) == doctest::Approx(2.0));

    PointCloud flat(1);
    flat.push(std::vector<double>{1.0});
    flat.push(std::vector<double>{1.0});
    CHECK_THROWS_AS(convex_hull(flat), DegenerateInput);
}

TEST_CASE("simplex volume formula") {
    for (int d = 2; d <= 6; ++d) {
        Simplex s;
        s.dim = d;
        s.vs.assign(static_cast<size_t>(d + 1) * d, 0.0);
        for (int k = 0; k < d; ++k) s.vs[static_cast<size_t>(k + 1) * d + k] = 1.0;
        double fact = 1.0;
        for (int i = 2; i <= d; ++i) fact *= i;
        CHECK(simplex_volume(s) == doctest::Approx(1.0 / fact).epsilon(1e-12));
    }
    Simplex degenerate;
    degenerate.dim = 2;
    degenerate.vs = {0, 0, 1, 1, 1, 1};  // repeated vertex
    CHECK(simplex_volume(degenerate) == 0.0);
}

TEST_CASE("support values") {
    const PointCloud cube = unit_cube_cloud();
    const double e1[3] = {1, 0, 0};
    CHECK(support_value(cube, e1) == doctest::Approx(1.0));
    const double diag[3] = {1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
    CHECK(support_value(cube, diag) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));

    PointCloud single(3);
    const double z[3] = {0.3, -0.7, 2.0};
    single.push(z);
    const double u[3] = {0.0, 1.0, 0.0};
    CHECK(support_value(single, u) == doctest::Approx(-0.7));

    PointCloud empty(3);
    CHECK_THROWS_AS(support_value(empty, e1), EmptyCloud);
}

TEST_CASE("containment tests") {
    const Polytope cube = convex_hull(unit_cube_cloud());
    const double inside[3] = {0.5, 0.5, 0.5};
    const double outside[3] = {1.5, 0.0, 0.0};
    const double boundary[3] = {1.0, 0.5, 0.5};
    CHECK(contains_point(cube, inside));
    CHECK(!contains_point(cube, outside));
    CHECK(contains_point(cube, boundary));

    std::vector<HalfSpace> hs;
    hs.push_back(HalfSpace{{1.0, 0.0, 0.0}, 1.0});
    hs.push_back(HalfSpace{{-1.0, 0.0, 0.0}, 0.0});
    CHECK(contains_point(std::span<const HalfSpace>(hs), inside));
    CHECK(!contains_point(std::span<const HalfSpace>(hs), outside));
}

TEST_CASE("simplex membership") {
    Simplex s;
    s.dim = 2;
    s.vs = {0, 0, 1, 0, 0, 1};
    const SimplexMembership m(s);
    CHECK(m.valid());
    const double in[2] = {0.2, 0.2};
    const double out[2] = {0.7, 0.7};
    const double corner[2] = {0.0, 0.0};
    CHECK(m.contains(in));
    CHECK(!m.contains(out));
    CHECK(m.contains(corner));
}
