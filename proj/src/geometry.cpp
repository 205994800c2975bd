#include "gplab/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "gplab/errors.hpp"

namespace gplab {

namespace {

// Factorials up to kMaxDim.
constexpr double kFactorial[] = {1, 1, 2, 6, 24, 120, 720, 5040, 40320};

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic pseudo-random unit direction for the symbolic perturbation
// of input point i.
inline void perturb_direction(std::uint64_t i, int d, double* dir) {
    std::uint64_t h = mix64(i ^ 0x5851F42D4C957F2DULL);
    double len2 = 0.0;
    for (int k = 0; k < d; ++k) {
        h = mix64(h);
        // map to [-1, 1); the exact distribution is immaterial
        dir[k] = static_cast<double>(static_cast<std::int64_t>(h >> 11)) * 0x1.0p-52;
        len2 += dir[k] * dir[k];
    }
    const double len = std::sqrt(len2);
    if (len < 1e-3) {  // essentially impossible; fall back to an axis
        for (int k = 0; k < d; ++k) dir[k] = 0.0;
        dir[0] = 1.0;
        return;
    }
    for (int k = 0; k < d; ++k) dir[k] /= len;
}

constexpr double kPerturbScale = 1e-12;

}  // namespace

Vec Simplex::centroid() const {
    Vec c(dim, 0.0);
    for (int i = 0; i <= dim; ++i) {
        auto v = vertex(i);
        for (int k = 0; k < dim; ++k) c[k] += v[k];
    }
    for (int k = 0; k < dim; ++k) c[k] /= static_cast<double>(dim + 1);
    return c;
}

PointCloud Polytope::vertex_cloud() const {
    PointCloud c(dim);
    c.xs = vxs;
    return c;
}

void ConvexHullBuilder::reset(const PointCloud& cloud) {
    d_ = cloud.dim;
    n_ = cloud.size();
    pts_.assign(cloud.xs.begin(), cloud.xs.end());
    double dir[kMaxDim];
    double maxabs = 0.0;
    for (double x : cloud.xs) maxabs = std::max(maxabs, std::fabs(x));
    scale_ = std::max(1.0, maxabs);
    for (size_t i = 0; i < n_; ++i) {
        perturb_direction(i, d_, dir);
        const double mag = kPerturbScale * static_cast<double>(i + 1);
        double* p = pts_.data() + i * static_cast<size_t>(d_);
        for (int k = 0; k < d_; ++k) p[k] += mag * dir[k];
    }
    facets_.clear();
    pending_.clear();
    visit_epoch_ = 0;
}

double ConvexHullBuilder::signed_dist(const HFacet& f, int p) const {
    const double* x = pts_.data() + static_cast<size_t>(p) * d_;
    double s = -f.offset;
    for (int k = 0; k < d_; ++k) s += f.normal[k] * x[k];
    return s;
}

void ConvexHullBuilder::compute_plane(HFacet& f, std::span<const double> inside_ref) {
    double rows[(kMaxDim - 1) * kMaxDim] = {};
    const double* v0 = pts_.data() + static_cast<size_t>(f.verts[0]) * d_;
    for (int r = 0; r + 1 < d_; ++r) {
        const double* v = pts_.data() + static_cast<size_t>(f.verts[r + 1]) * d_;
        for (int k = 0; k < d_; ++k) rows[r * d_ + k] = v[k] - v0[k];
    }
    const double len = hyperplane_normal(rows, d_, f.normal);
    if (len == 0.0) {
        // Degenerate facet; orient away from the reference point.
        double best = 0.0;
        for (int k = 0; k < d_; ++k) {
            f.normal[k] = v0[k] - inside_ref[k];
            best += f.normal[k] * f.normal[k];
        }
        if (!normalize(f.normal, d_)) {
            for (int k = 0; k < d_; ++k) f.normal[k] = 0.0;
            f.normal[0] = 1.0;
        }
    }
    f.offset = 0.0;
    for (int k = 0; k < d_; ++k) f.offset += f.normal[k] * v0[k];
    double ref = -f.offset;
    for (int k = 0; k < d_; ++k) ref += f.normal[k] * inside_ref[k];
    if (ref > 0.0) {
        for (int k = 0; k < d_; ++k) f.normal[k] = -f.normal[k];
        f.offset = -f.offset;
    }
}

bool ConvexHullBuilder::init_simplex() {
    const double eps_aff = 1e-9 * scale_;
    std::array<int, kMaxDim + 1> chosen{};
    int count = 0;

    // First vertex: extreme along axis 0 (deterministic tie-break on index).
    int lo = 0, hi = 0;
    for (size_t i = 1; i < n_; ++i) {
        if (pts_[i * d_] < pts_[static_cast<size_t>(lo) * d_]) lo = static_cast<int>(i);
        if (pts_[i * d_] > pts_[static_cast<size_t>(hi) * d_]) hi = static_cast<int>(i);
    }
    chosen[count++] = lo;

    // Greedily extend by the point farthest from the current affine hull.
    double basis[kMaxDim * kMaxDim];
    int rank = 0;
    const double* p0 = pts_.data() + static_cast<size_t>(lo) * d_;
    auto residual = [&](const double* p, double* out) {
        for (int k = 0; k < d_; ++k) out[k] = p[k] - p0[k];
        for (int j = 0; j < rank; ++j) {
            const double* b = basis + j * d_;
            double proj = 0.0;
            for (int k = 0; k < d_; ++k) proj += out[k] * b[k];
            for (int k = 0; k < d_; ++k) out[k] -= proj * b[k];
        }
        double s = 0.0;
        for (int k = 0; k < d_; ++k) s += out[k] * out[k];
        return std::sqrt(s);
    };
    while (count < d_ + 1) {
        int best = -1;
        double best_dist = eps_aff;
        double tmp[kMaxDim];
        // Seed the search with `hi` first so axis-extremes are preferred.
        for (size_t ii = 0; ii <= n_; ++ii) {
            const int i = (ii == 0) ? hi : static_cast<int>(ii - 1);
            if (ii > 0 && i == hi) continue;
            const double dist = residual(pts_.data() + static_cast<size_t>(i) * d_, tmp);
            if (dist > best_dist) {
                best = i;
                best_dist = dist;
            }
        }
        if (best < 0) return false;
        residual(pts_.data() + static_cast<size_t>(best) * d_, basis + rank * d_);
        normalize(basis + rank * d_, d_);
        ++rank;
        chosen[count++] = best;
    }

    // Interior reference: centroid of the initial simplex (the hull only
    // grows, so it stays interior).
    interior_.assign(d_, 0.0);
    for (int i = 0; i <= d_; ++i) {
        const double* v = pts_.data() + static_cast<size_t>(chosen[i]) * d_;
        for (int k = 0; k < d_; ++k) interior_[k] += v[k];
    }
    for (int k = 0; k < d_; ++k) interior_[k] /= static_cast<double>(d_ + 1);

    // Facet i omits chosen[i]; its neighbor across the ridge omitting
    // vertex chosen[j] is facet j.
    facets_.resize(static_cast<size_t>(d_) + 1);
    for (int i = 0; i <= d_; ++i) {
        HFacet& f = facets_[static_cast<size_t>(i)];
        f.alive = true;
        f.mark = 0;
        f.outside.clear();
        f.furthest = -1;
        f.furthest_dist = 0.0;
        int t = 0;
        for (int j = 0; j <= d_; ++j) {
            if (j == i) continue;
            f.verts[t] = chosen[j];
            f.neigh[t] = j;
            ++t;
        }
        compute_plane(f, interior_);
    }

    // Initial partition of the remaining points.
    const double eps_vis = 1e-10 * scale_;
    for (size_t i = 0; i < n_; ++i) {
        const int pi = static_cast<int>(i);
        bool is_vertex = false;
        for (int j = 0; j <= d_; ++j) is_vertex |= (chosen[j] == pi);
        if (is_vertex) continue;
        for (int fi = 0; fi <= d_; ++fi) {
            const double dist = signed_dist(facets_[static_cast<size_t>(fi)], pi);
            if (dist > eps_vis) {
                HFacet& f = facets_[static_cast<size_t>(fi)];
                f.outside.push_back(pi);
                if (dist > f.furthest_dist) {
                    f.furthest_dist = dist;
                    f.furthest = pi;
                }
                break;
            }
        }
    }
    for (int fi = 0; fi <= d_; ++fi) {
        if (!facets_[static_cast<size_t>(fi)].outside.empty()) pending_.push_back(fi);
    }
    return true;
}

void ConvexHullBuilder::add_point(int p, int start_facet) {
    const double eps_vis = 1e-10 * scale_;

    // Visible region: BFS over neighbors, so it is connected by construction.
    ++visit_epoch_;
    visible_.clear();
    visible_.push_back(start_facet);
    facets_[static_cast<size_t>(start_facet)].mark = visit_epoch_;
    for (size_t head = 0; head < visible_.size(); ++head) {
        const int fi = visible_[head];
        for (int t = 0; t < d_; ++t) {
            const int g = facets_[static_cast<size_t>(fi)].neigh[t];
            if (g < 0) continue;
            HFacet& gf = facets_[static_cast<size_t>(g)];
            if (!gf.alive || gf.mark == visit_epoch_) continue;
            if (signed_dist(gf, p) > eps_vis) {
                gf.mark = visit_epoch_;
                visible_.push_back(g);
            }
        }
    }

    // Horizon ridges and the new cone of facets around p.
    new_facets_.clear();
    struct RidgeKey {
        std::array<int, kMaxDim> ids;
        int count;
        int facet;
        int slot;
    };
    static thread_local std::vector<RidgeKey> open_ridges;
    open_ridges.clear();

    for (const int fi : visible_) {
        // Copy the index arrays: facets_ may reallocate as new facets arrive.
        int sverts[kMaxDim], sneigh[kMaxDim];
        std::copy_n(facets_[static_cast<size_t>(fi)].verts, d_, sverts);
        std::copy_n(facets_[static_cast<size_t>(fi)].neigh, d_, sneigh);
        for (int t = 0; t < d_; ++t) {
            const int g = sneigh[t];
            if (g >= 0 && facets_[static_cast<size_t>(g)].alive &&
                facets_[static_cast<size_t>(g)].mark == visit_epoch_) {
                continue;  // internal ridge
            }
            // Ridge omitting verts[t] is on the horizon; build a new facet.
            const int nf = static_cast<int>(facets_.size());
            facets_.emplace_back();
            HFacet& f = facets_.back();
            f.alive = true;
            f.mark = 0;
            f.outside.clear();
            f.furthest = -1;
            f.furthest_dist = 0.0;
            int idx = 0;
            for (int u = 0; u < d_; ++u) {
                if (u == t) continue;
                f.verts[idx] = sverts[u];
                f.neigh[idx] = -1;
                ++idx;
            }
            f.verts[d_ - 1] = p;
            f.neigh[d_ - 1] = g;  // across the horizon ridge
            if (g >= 0) {
                HFacet& gf = facets_[static_cast<size_t>(g)];
                for (int u = 0; u < d_; ++u) {
                    if (gf.neigh[u] == fi) gf.neigh[u] = nf;
                }
            }
            compute_plane(f, interior_);
            new_facets_.push_back(nf);

            // Match the d-1 side ridges (each contains p) with siblings.
            for (int drop = 0; drop + 1 < d_; ++drop) {
                RidgeKey key{};
                key.count = 0;
                for (int u = 0; u + 1 < d_; ++u) {
                    if (u == drop) continue;
                    key.ids[key.count++] = f.verts[u];
                }
                std::sort(key.ids.begin(), key.ids.begin() + key.count);
                bool matched = false;
                for (size_t s = 0; s < open_ridges.size(); ++s) {
                    RidgeKey& o = open_ridges[s];
                    if (o.count == key.count &&
                        std::equal(o.ids.begin(), o.ids.begin() + o.count, key.ids.begin())) {
                        facets_[static_cast<size_t>(nf)].neigh[drop] = o.facet;
                        facets_[static_cast<size_t>(o.facet)].neigh[o.slot] = nf;
                        o = open_ridges.back();
                        open_ridges.pop_back();
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    key.facet = nf;
                    key.slot = drop;
                    open_ridges.push_back(key);
                }
            }
        }
    }

    // Redistribute outside points of the deleted facets over the new cone.
    orphan_points_.clear();
    for (const int fi : visible_) {
        HFacet& f = facets_[static_cast<size_t>(fi)];
        f.alive = false;
        for (const int q : f.outside) {
            if (q != p) orphan_points_.push_back(q);
        }
        f.outside.clear();
        f.outside.shrink_to_fit();
    }
    for (const int q : orphan_points_) {
        bool captured = false;
        for (const int nf : new_facets_) {
            HFacet& f = facets_[static_cast<size_t>(nf)];
            const double dist = signed_dist(f, q);
            if (dist > eps_vis) {
                f.outside.push_back(q);
                if (dist > f.furthest_dist) {
                    f.furthest_dist = dist;
                    f.furthest = q;
                }
                captured = true;
                break;
            }
        }
        // Points below every new facet are usually interior now, but can in
        // rare cases still be outside an unmodified facet; run() re-checks
        // them against the final facet set.
        if (!captured) maybe_dropped_.push_back(q);
    }
    for (const int nf : new_facets_) {
        if (!facets_[static_cast<size_t>(nf)].outside.empty()) pending_.push_back(nf);
    }
}

bool ConvexHullBuilder::run() {
    if (n_ < static_cast<size_t>(d_) + 1) return false;
    maybe_dropped_.clear();
    if (!init_simplex()) return false;
    const double eps_vis = 1e-10 * scale_;

    for (int round = 0; round < 64; ++round) {
        while (!pending_.empty()) {
            const int fi = pending_.back();
            pending_.pop_back();
            HFacet& f = facets_[static_cast<size_t>(fi)];
            if (!f.alive || f.outside.empty()) continue;
            int p = f.furthest;
            if (p < 0 || signed_dist(f, p) <= eps_vis) {
                // Recompute; the cached furthest may be stale after moves.
                double best = eps_vis;
                p = -1;
                for (const int q : f.outside) {
                    const double dist = signed_dist(f, q);
                    if (dist > best) { best = dist; p = q; }
                }
                if (p < 0) { f.outside.clear(); continue; }
            }
            add_point(p, fi);
        }
        // Re-check points dropped during redistribution against the final
        // facet set. Points interior to the initial simplex never appear
        // here: the hull contains that simplex.
        std::vector<int> recheck;
        recheck.swap(maybe_dropped_);
        bool clean = true;
        for (const int q : recheck) {
            for (size_t fi = 0; fi < facets_.size(); ++fi) {
                HFacet& f = facets_[fi];
                if (!f.alive) continue;
                const double dist = signed_dist(f, q);
                if (dist > eps_vis) {
                    bool is_vertex = false;
                    for (int t = 0; t < d_; ++t) is_vertex |= (f.verts[t] == q);
                    if (is_vertex) continue;
                    f.outside.push_back(q);
                    if (dist > f.furthest_dist) {
                        f.furthest_dist = dist;
                        f.furthest = q;
                    }
                    pending_.push_back(static_cast<int>(fi));
                    clean = false;
                    break;
                }
            }
        }
        if (clean) return true;
    }
    return true;  // tolerance-level disagreement; facets are eps-consistent
}

Polytope ConvexHullBuilder::extract(const PointCloud& cloud) const {
    Polytope poly;
    poly.dim = d_;

    std::vector<int> used;
    for (const HFacet& f : facets_) {
        if (!f.alive) continue;
        for (int t = 0; t < d_; ++t) used.push_back(f.verts[t]);
    }
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());

    std::vector<int> remap(n_, -1);
    for (size_t i = 0; i < used.size(); ++i) remap[static_cast<size_t>(used[i])] = static_cast<int>(i);

    poly.vxs.reserve(used.size() * static_cast<size_t>(d_));
    for (const int idx : used) {
        auto p = cloud.point(static_cast<size_t>(idx));
        poly.vxs.insert(poly.vxs.end(), p.begin(), p.end());
    }

    for (const HFacet& f : facets_) {
        if (!f.alive) continue;
        Facet out;
        out.verts.resize(static_cast<size_t>(d_));
        for (int t = 0; t < d_; ++t) out.verts[static_cast<size_t>(t)] = remap[static_cast<size_t>(f.verts[t])];
        // Recompute the plane from the original (unperturbed) coordinates,
        // keeping the working orientation.
        double rows[(kMaxDim - 1) * kMaxDim];
        auto v0 = cloud.point(static_cast<size_t>(f.verts[0]));
        for (int r = 0; r + 1 < d_; ++r) {
            auto v = cloud.point(static_cast<size_t>(f.verts[r + 1]));
            for (int k = 0; k < d_; ++k) rows[r * d_ + k] = v[k] - v0[k];
        }
        double nrm[kMaxDim];
        const double len = hyperplane_normal(rows, d_, nrm);
        out.normal.assign(f.normal, f.normal + d_);
        if (len > 1e-13 * scale_) {
            double align = 0.0;
            for (int k = 0; k < d_; ++k) align += nrm[k] * f.normal[k];
            const double sgn = (align < 0.0) ? -1.0 : 1.0;
            for (int k = 0; k < d_; ++k) out.normal[static_cast<size_t>(k)] = sgn * nrm[k];
        }
        double off = 0.0;
        for (int t = 0; t < d_; ++t) {
            auto v = cloud.point(static_cast<size_t>(f.verts[t]));
            off += dot(out.normal, v);
        }
        out.offset = off / static_cast<double>(d_);
        poly.facets.push_back(std::move(out));
    }
    return poly;
}

Polytope ConvexHullBuilder::build(const PointCloud& cloud) {
    if (cloud.dim < 1 || cloud.dim > kMaxDim) {
        throw InvalidDimension("convex_hull: dimension must be in [1, 8]");
    }
    if (cloud.size() < static_cast<size_t>(cloud.dim) + 1) {
        throw DegenerateInput("convex_hull: need at least d+1 points");
    }
    if (cloud.dim == 1) {
        // Trivial 1-D hull: the segment between the extreme points.
        size_t lo = 0, hi = 0;
        for (size_t i = 1; i < cloud.size(); ++i) {
            if (cloud.xs[i] < cloud.xs[lo]) lo = i;
            if (cloud.xs[i] > cloud.xs[hi]) hi = i;
        }
        if (!(cloud.xs[hi] - cloud.xs[lo] > 1e-9 * std::max(1.0, std::fabs(cloud.xs[hi])))) {
            throw DegenerateInput("convex_hull: 1-D input has no extent");
        }
        Polytope poly;
        poly.dim = 1;
        poly.vxs = {cloud.xs[lo], cloud.xs[hi]};
        Facet fhi;
        fhi.verts = {1};
        fhi.normal = {1.0};
        fhi.offset = cloud.xs[hi];
        Facet flo;
        flo.verts = {0};
        flo.normal = {-1.0};
        flo.offset = -cloud.xs[lo];
        poly.facets = {std::move(fhi), std::move(flo)};
        return poly;
    }
    reset(cloud);
    if (!run()) {
        throw DegenerateInput("convex_hull: input is not full-dimensional");
    }
    return extract(cloud);
}

double ConvexHullBuilder::hull_volume(const PointCloud& cloud) {
    return polytope_volume(build(cloud));
}

Polytope convex_hull(const PointCloud& cloud) {
    ConvexHullBuilder builder;
    return builder.build(cloud);
}

double polytope_volume(const Polytope& p) {
    const int d = p.dim;
    if (d == 1) return p.vxs[1] - p.vxs[0];
    Vec c(d, 0.0);
    const size_t nv = p.vertex_count();
    for (size_t i = 0; i < nv; ++i) {
        auto v = p.vertex(i);
        for (int k = 0; k < d; ++k) c[k] += v[k];
    }
    for (int k = 0; k < d; ++k) c[k] /= static_cast<double>(nv);

    double rows[kMaxDim * kMaxDim];
    double vol = 0.0;
    for (const Facet& f : p.facets) {
        for (int t = 0; t < d; ++t) {
            auto v = p.vertex(static_cast<size_t>(f.verts[static_cast<size_t>(t)]));
            for (int k = 0; k < d; ++k) rows[t * d + k] = v[k] - c[k];
        }
        vol += std::fabs(det_small(rows, d));
    }
    return vol / kFactorial[d];
}

double surface_area(const Polytope& p) {
    const int d = p.dim;
    if (d == 1) return static_cast<double>(p.facets.size());
    double rows[kMaxDim * kMaxDim];
    double gram[kMaxDim * kMaxDim];
    double area = 0.0;
    for (const Facet& f : p.facets) {
        auto v0 = p.vertex(static_cast<size_t>(f.verts[0]));
        for (int t = 0; t + 1 < d; ++t) {
            auto v = p.vertex(static_cast<size_t>(f.verts[static_cast<size_t>(t) + 1]));
            for (int k = 0; k < d; ++k) rows[t * d + k] = v[k] - v0[k];
        }
        const int m = d - 1;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                double s = 0.0;
                for (int k = 0; k < d; ++k) s += rows[i * d + k] * rows[j * d + k];
                gram[i * m + j] = s;
            }
        }
        const double g = det_small(gram, m);
        if (g > 0.0) area += std::sqrt(g) / kFactorial[m];
    }
    return area;
}

double simplex_volume(const double* verts, int d) {
    double rows[kMaxDim * kMaxDim];
    for (int i = 0; i < d; ++i) {
        for (int k = 0; k < d; ++k) {
            rows[i * d + k] = verts[(i + 1) * d + k] - verts[k];
        }
    }
    return std::fabs(det_small(rows, d)) / kFactorial[d];
}

double simplex_volume(const Simplex& s) { return simplex_volume(s.vs.data(), s.dim); }

double support_value(const PointCloud& cloud, std::span<const double> direction) {
    if (cloud.empty()) throw EmptyCloud("support_value: empty cloud");
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < cloud.size(); ++i) {
        best = std::max(best, dot(cloud.point(i), direction));
    }
    return best;
}

bool contains_point(const Polytope& p, std::span<const double> x, double tol) {
    for (const Facet& f : p.facets) {
        if (dot(f.normal, x) > f.offset + tol) return false;
    }
    return true;
}

bool contains_point(std::span<const HalfSpace> hs, std::span<const double> x, double tol) {
    for (const HalfSpace& h : hs) {
        if (!h.contains(x, tol)) return false;
    }
    return true;
}

SimplexMembership::SimplexMembership(const Simplex& s) : d_(s.dim) {
    v0_.assign(s.vertex(0).begin(), s.vertex(0).end());
    double m[kMaxDim * kMaxDim];
    for (int j = 1; j <= d_; ++j) {
        auto v = s.vertex(j);
        for (int k = 0; k < d_; ++k) m[k * d_ + (j - 1)] = v[k] - v0_[k];
    }
    lu_ = SquareLU::factor(m, d_);
    valid_ = !lu_.singular;
}

bool SimplexMembership::contains(std::span<const double> x, double tol) const {
    if (!valid_) return false;
    double rhs[kMaxDim], lam[kMaxDim];
    for (int k = 0; k < d_; ++k) rhs[k] = x[k] - v0_[k];
    if (!lu_.solve(rhs, lam)) return false;
    double sum = 0.0;
    for (int k = 0; k < d_; ++k) {
        if (lam[k] < -tol) return false;
        sum += lam[k];
    }
    return sum <= 1.0 + tol;
}

}  // namespace gplab
