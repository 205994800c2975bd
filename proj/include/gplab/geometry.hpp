#pragma once

#include <span>
#include <vector>

#include "gplab/vecmath.hpp"

namespace gplab {

// Shared absolute tolerance for facet membership and containment tests.
inline constexpr double kGeomTol = 1e-9;

struct PointCloud {
    int dim = 0;
    std::vector<double> xs;  // flat row-major storage, size() * dim doubles

    PointCloud() = default;
    explicit PointCloud(int d) : dim(d) {}

    size_t size() const { return dim == 0 ? 0 : xs.size() / static_cast<size_t>(dim); }
    bool empty() const { return xs.empty(); }

    std::span<const double> point(size_t i) const {
        return {xs.data() + i * static_cast<size_t>(dim), static_cast<size_t>(dim)};
    }
    std::span<double> point(size_t i) {
        return {xs.data() + i * static_cast<size_t>(dim), static_cast<size_t>(dim)};
    }

    void push(std::span<const double> p) { xs.insert(xs.end(), p.begin(), p.end()); }
    void clear() { xs.clear(); }
};

// The set {x : <x, normal> <= offset}, with a unit normal.
struct HalfSpace {
    Vec normal;
    double offset = 0.0;

    bool contains(std::span<const double> x, double tol = kGeomTol) const {
        return dot(normal, x) <= offset + tol;
    }
};

// d+1 vertices in R^d, stored flat row-major.
struct Simplex {
    int dim = 0;
    std::vector<double> vs;

    Simplex() = default;
    Simplex(int d, std::vector<double> vertices) : dim(d), vs(std::move(vertices)) {}

    int vertex_count() const { return dim + 1; }
    std::span<const double> vertex(int i) const {
        return {vs.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
    }
    Vec centroid() const;
};

struct Facet {
    std::vector<int> verts;  // indices into the polytope vertex list
    Vec normal;              // outward unit normal
    double offset = 0.0;
};

// Full-dimensional convex hull: vertex list (a subset of the input points)
// plus simplicial facets. Values are immutable after construction.
struct Polytope {
    int dim = 0;
    std::vector<double> vxs;  // vertices, flat row-major
    std::vector<Facet> facets;

    size_t vertex_count() const { return dim == 0 ? 0 : vxs.size() / static_cast<size_t>(dim); }
    std::span<const double> vertex(size_t i) const {
        return {vxs.data() + i * static_cast<size_t>(dim), static_cast<size_t>(dim)};
    }
    PointCloud vertex_cloud() const;
};

// Incremental beneath-beyond hull with outside sets, for 1 <= d <= 8.
// Inputs pass through a deterministic symbolic perturbation (point i moves by
// 1e-12*(i+1) in a pseudo-random direction derived from i) that settles the
// combinatorics of constructed fixtures; reported vertex coordinates are the
// original inputs. Throws DegenerateInput when the affine hull of the
// (perturbed) input is not all of R^d.
//
// The builder is reusable; repeated builds recycle its buffers. It is not
// safe to share one builder between threads.
class ConvexHullBuilder {
public:
    Polytope build(const PointCloud& cloud);

    // Volume of the hull without assembling a Polytope. Same path as
    // build() + polytope_volume().
    double hull_volume(const PointCloud& cloud);

private:
    struct HFacet {
        int verts[kMaxDim];
        int neigh[kMaxDim];
        double normal[kMaxDim];
        double offset;
        std::vector<int> outside;
        int furthest = -1;
        double furthest_dist = 0.0;
        bool alive = false;
        unsigned mark = 0;
    };

    int d_ = 0;
    size_t n_ = 0;
    double scale_ = 1.0;
    std::vector<double> pts_;  // perturbed working copy
    Vec interior_;             // centroid of the initial simplex; stays interior
    std::vector<HFacet> facets_;
    std::vector<int> pending_;  // facets that may still have outside points
    unsigned visit_epoch_ = 0;
    std::vector<int> visible_;
    std::vector<int> new_facets_;
    std::vector<int> orphan_points_;
    std::vector<int> maybe_dropped_;  // points dropped during redistribution

    void reset(const PointCloud& cloud);
    bool run();  // returns false when input is degenerate
    std::span<const double> pt(int i) const {
        return {pts_.data() + static_cast<size_t>(i) * d_, static_cast<size_t>(d_)};
    }
    double signed_dist(const HFacet& f, int p) const;
    bool init_simplex();
    void compute_plane(HFacet& f, std::span<const double> inside_ref);
    void add_point(int p, int start_facet);
    Polytope extract(const PointCloud& cloud) const;
};

Polytope convex_hull(const PointCloud& cloud);

// Lebesgue volume, computed as the sum of simplex volumes of facet cones
// from the vertex centroid.
double polytope_volume(const Polytope& p);

// Sum of (d-1)-volumes of the facets. For d=1 each endpoint facet counts 1,
// so a segment has surface area 2.
double surface_area(const Polytope& p);

double simplex_volume(const Simplex& s);
// `verts` holds d+1 rows of length d.
double simplex_volume(const double* verts, int d);

double support_value(const PointCloud& cloud, std::span<const double> direction);

bool contains_point(const Polytope& p, std::span<const double> x, double tol = kGeomTol);
bool contains_point(std::span<const HalfSpace> hs, std::span<const double> x,
                    double tol = kGeomTol);

// Precomputed barycentric-coordinate test for membership in a simplex.
class SimplexMembership {
public:
    SimplexMembership() = default;
    explicit SimplexMembership(const Simplex& s);

    bool contains(std::span<const double> x, double tol = kGeomTol) const;
    bool valid() const { return valid_; }

private:
    int d_ = 0;
    Vec v0_;
    SquareLU lu_;
    bool valid_ = false;
};

}  // namespace gplab
