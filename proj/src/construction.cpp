#include "gplab/construction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gplab/errors.hpp"
#include "gplab/intrinsic.hpp"

namespace gplab {

double radius_r(long long n) {
    if (n < 3) throw InvalidN("radius_r: need n >= 3");
    const double ln = std::log(static_cast<double>(n));
    return std::sqrt(2.0 * ln - std::log(ln));
}

std::vector<Vec> pack_sphere(int d, double r, double c1, RandomStream& rs) {
    if (!(r > 0.0)) throw NonPositiveValue("pack_sphere: r must be > 0");
    if (!(c1 > 0.0)) throw NonPositiveValue("pack_sphere: c1 must be > 0");
    std::vector<Vec> accepted;
    const double min_dist2 = 4.0 * c1 * c1;
    const long long budget = kPackingWitness * d;
    long long consecutive_rejections = 0;
    double u[kMaxDim];
    while (consecutive_rejections < budget) {
        rs.unit_vector(d, u);
        Vec cand(d);
        for (int k = 0; k < d; ++k) cand[k] = r * u[k];
        bool ok = true;
        for (const Vec& p : accepted) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) {
                const double diff = cand[k] - p[k];
                s += diff * diff;
            }
            if (s < min_dist2) { ok = false; break; }
        }
        if (ok) {
            accepted.push_back(std::move(cand));
            consecutive_rejections = 0;
        } else {
            ++consecutive_rejections;
        }
    }
    return accepted;
}

namespace {

// Orthonormal tangent frame at y/|y|: Gram-Schmidt of the coordinate axes
// against the radial direction, in axis order.
void tangent_frame(const Vec& y, int d, double* frame /* (d-1) x d */) {
    double work[(kMaxDim + 1) * kMaxDim];
    const double ny = norm(y);
    for (int k = 0; k < d; ++k) work[k] = y[k] / ny;
    int rows = 1;
    for (int a = 0; a < d && rows < d; ++a) {
        std::memset(work + rows * d, 0, sizeof(double) * static_cast<size_t>(d));
        work[rows * d + a] = 1.0;
        ++rows;
    }
    const int rank = gram_schmidt(work, rows, d);
    if (rank < d) throw ConstructionFailure("tangent_frame: frame construction failed");
    std::memcpy(frame, work + d, sizeof(double) * static_cast<size_t>((d - 1) * d));
}

// Vertex directions of a regular simplex with unit circumradius in R^(d-1):
// columns of the Helmert basis, rescaled. out holds d rows of length d-1.
void regular_simplex_directions(int d, double* out) {
    const int m = d - 1;
    double h[kMaxDim * kMaxDim];  // Helmert rows t = 1..m over R^d
    for (int t = 1; t <= m; ++t) {
        const double denom = std::sqrt(static_cast<double>(t) * (t + 1));
        for (int k = 0; k < d; ++k) {
            double v = 0.0;
            if (k < t) v = 1.0 / denom;
            else if (k == t) v = -static_cast<double>(t) / denom;
            h[(t - 1) * d + k] = v;
        }
    }
    const double scale = 1.0 / std::sqrt(1.0 - 1.0 / static_cast<double>(d));
    for (int k = 0; k < d; ++k) {
        for (int t = 0; t < m; ++t) out[k * m + t] = scale * h[t * d + k];
    }
}

struct TangentPlane {
    Vec u;      // unit normal
    double b;   // offset: the half-space is {<u, x> <= b}
};

double support_over_simplex(const Simplex& s, std::span<const double> u) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= s.dim; ++i) best = std::max(best, dot(s.vertex(i), u));
    return best;
}

double min_over_simplex(const Simplex& s, std::span<const double> u) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= s.dim; ++i) best = std::min(best, dot(s.vertex(i), u));
    return best;
}

// The hyperplane bounding H_i^j: touches every homothet except Delta_i^j,
// contains the base homothets Delta_i^k (k != 0, j) and excludes Delta_i^0,
// Delta_i^j and the origin.
//
// The homothets are translates of c2 * Delta, so a plane touching all the
// base copies simultaneously must be normal to the differences y^k - y^k'
// (k, k' in A). That leaves a circle of candidate normals; on it, common
// tangency with Delta_i^0 reduces to the scalar equation
//   c2 * width_Delta(u) = (1 - c2) <u, y^0 - y^(k0)>.
// Roots are found by scanning and bisection, then filtered by the stated
// containment and exclusion requirements.
TangentPlane separating_halfspace(int d, double c2, const Simplex& delta,
                                  const std::vector<Simplex>& delta_j,
                                  const PointCloud& ys, const Vec& y0, int j) {
    // Basis {a, b} of the 2-plane orthogonal to span{y^k - y^k0 : k in A}.
    int k0 = -1;
    double constraints[(kMaxDim + 2) * kMaxDim];
    int rows = 0;
    for (int k = 1; k <= d; ++k) {
        if (k == j) continue;
        if (k0 < 0) { k0 = k; continue; }
        auto vk = ys.point(static_cast<size_t>(k - 1));
        auto v0 = ys.point(static_cast<size_t>(k0 - 1));
        for (int t = 0; t < d; ++t) constraints[rows * d + t] = vk[t] - v0[t];
        ++rows;
    }
    const int rank = gram_schmidt(constraints, rows, d);
    double plane_basis[2 * kMaxDim];
    int found = 0;
    for (int axis = 0; axis < d && found < 2; ++axis) {
        double v[kMaxDim];
        std::memset(v, 0, sizeof(v));
        v[axis] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (int t = 0; t < rank; ++t) {
                const double* u = constraints + t * d;
                double p = 0.0;
                for (int k = 0; k < d; ++k) p += v[k] * u[k];
                for (int k = 0; k < d; ++k) v[k] -= p * u[k];
            }
            for (int t = 0; t < found; ++t) {
                const double* u = plane_basis + t * d;
                double p = 0.0;
                for (int k = 0; k < d; ++k) p += v[k] * u[k];
                for (int k = 0; k < d; ++k) v[k] -= p * u[k];
            }
        }
        if (normalize(v, d, 1e-8)) {
            std::memcpy(plane_basis + found * d, v, sizeof(double) * static_cast<size_t>(d));
            ++found;
        }
    }
    if (found < 2) throw ConstructionFailure("separating_halfspace: normal space collapsed");

    const Vec gap = sub(y0, ys.point(static_cast<size_t>(k0 - 1)));
    Vec u(d);
    const auto eval_u = [&](double theta, Vec& out) {
        const double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < d; ++k) {
            out[k] = c * plane_basis[k] + s * plane_basis[d + k];
        }
    };
    const auto g = [&](double theta) {
        eval_u(theta, u);
        const double width = support_over_simplex(delta, u) + support_over_simplex(delta, scaled(u, -1.0));
        return c2 * width - (1.0 - c2) * dot(u, gap);
    };

    constexpr int kGrid = 4096;
    double prev = g(0.0);
    std::vector<double> roots;
    for (int i = 1; i <= kGrid; ++i) {
        const double theta = 2.0 * M_PI * i / kGrid;
        const double cur = g(theta);
        if ((prev < 0.0 && cur >= 0.0) || (prev >= 0.0 && cur < 0.0)) {
            double lo = 2.0 * M_PI * (i - 1) / kGrid, hi = theta;
            double glo = prev;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double gm = g(mid);
                if ((glo < 0.0) == (gm < 0.0)) { lo = mid; glo = gm; }
                else hi = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        prev = cur;
    }

    constexpr double kTouchTol = 1e-7;
    TangentPlane best;
    bool have = false;
    for (const double theta : roots) {
        eval_u(theta, u);
        const double b = c2 * support_over_simplex(delta, u) +
                         (1.0 - c2) * dot(u, ys.point(static_cast<size_t>(k0 - 1)));
        bool ok = (b < -1e-9);  // the half-space must exclude the origin
        for (int k = 1; k <= d && ok; ++k) {
            if (k == j) continue;
            const double mx = support_over_simplex(delta_j[static_cast<size_t>(k)], u);
            if (std::fabs(mx - b) > kTouchTol) ok = false;  // contained and touching
        }
        if (ok) {
            const double mn0 = min_over_simplex(delta_j[0], u);
            if (std::fabs(mn0 - b) > kTouchTol) ok = false;  // excluded and touching
        }
        if (ok) {
            const double mnj = min_over_simplex(delta_j[static_cast<size_t>(j)], u);
            if (!(mnj > b + 1e-9)) ok = false;  // strictly excluded
        }
        if (ok && (!have || b < best.b)) {
            best.u = u;
            best.b = b;
            have = true;
        }
    }
    if (!have) {
        throw ConstructionFailure(
            "separating_halfspace: no admissible tangent hyperplane at these constants");
    }
    return best;
}

}  // namespace

bool SiteFrame::in_forbidden_union(std::span<const double> x) const {
    if (h_plus.contains(x)) return true;
    for (const HalfSpace& h : h_side) {
        if (h.contains(x)) return true;
    }
    return false;
}

SiteFrame build_site(const Vec& y, int d, double r, double c1, double c2) {
    if (d < 2 || d > kMaxDim) throw InvalidDimension("build_site: need 2 <= d <= 8");
    if (!(c2 > 0.0 && c2 < 1.0)) throw ConstructionFailure("build_site: need 0 < c2 < 1");
    SiteFrame site;
    site.dim = d;
    site.r = r;
    site.c1 = c1;
    site.c2 = c2;
    site.y = y;
    site.y0 = scaled(y, 1.0 + 1.0 / (r * r));

    // Tangent-plane regular simplex on S^{d-2}(y, sqrt 2).
    double frame[(kMaxDim - 1) * kMaxDim];
    tangent_frame(y, d, frame);
    double dirs[kMaxDim * (kMaxDim - 1)];
    regular_simplex_directions(d, dirs);
    site.ys = PointCloud(d);
    const double kSqrt2 = std::sqrt(2.0);
    for (int k = 0; k < d; ++k) {
        Vec p = y;
        for (int t = 0; t < d - 1; ++t) {
            const double w = kSqrt2 * dirs[k * (d - 1) + t];
            for (int c = 0; c < d; ++c) p[c] += w * frame[t * d + c];
        }
        site.ys.push(p);
    }

    // Delta = [y0, y^1..y^d].
    site.delta.dim = d;
    site.delta.vs.assign(site.y0.begin(), site.y0.end());
    site.delta.vs.insert(site.delta.vs.end(), site.ys.xs.begin(), site.ys.xs.end());

    // Homothets Delta^j with centre vertex j and factor c2.
    site.delta_j.resize(static_cast<size_t>(d) + 1);
    for (int j = 0; j <= d; ++j) {
        Simplex& s = site.delta_j[static_cast<size_t>(j)];
        s.dim = d;
        s.vs.resize(static_cast<size_t>(d + 1) * d);
        auto centre = site.delta.vertex(j);
        for (int t = 0; t <= d; ++t) {
            auto v = site.delta.vertex(t);
            for (int k = 0; k < d; ++k) {
                s.vs[static_cast<size_t>(t) * d + k] = centre[k] + c2 * (v[k] - centre[k]);
            }
        }
    }
    site.delta_j_member.reserve(site.delta_j.size());
    for (const Simplex& s : site.delta_j) site.delta_j_member.emplace_back(s);

    // Tangent half-space away from the origin: {<x, y/r> >= r}.
    site.h_plus.normal = scaled(y, -1.0 / r);
    site.h_plus.offset = -r;

    // Side half-spaces H^1..H^d.
    site.h_side.clear();
    for (int j = 1; j <= d; ++j) {
        const TangentPlane t =
            separating_halfspace(d, c2, site.delta, site.delta_j, site.ys, site.y0, j);
        site.h_side.push_back(HalfSpace{t.u, t.b});
    }

    // Cone generators y^j - y0.
    site.d_generators = PointCloud(d);
    for (int k = 0; k < d; ++k) {
        site.d_generators.push(sub(site.ys.point(static_cast<size_t>(k)), site.y0));
    }

    // Canonical points: centroids of the homothets.
    site.z = PointCloud(d);
    for (int j = 0; j <= d; ++j) {
        site.z.push(site.delta_j[static_cast<size_t>(j)].centroid());
    }

    // Circular cones around the axis from z^0 toward y.
    Vec axis = sub(y, site.z.point(0));
    if (!normalize(axis.data(), d)) {
        throw ConstructionFailure("build_site: degenerate cone axis");
    }
    site.cone_inner.apex.assign(site.z.point(0).begin(), site.z.point(0).end());
    site.cone_inner.axis = axis;
    site.cone_inner.half_angle = std::atan(r / static_cast<double>(d - 1));
    site.cone_outer.apex = site.cone_inner.apex;
    site.cone_outer.axis = axis;
    site.cone_outer.half_angle = std::atan(2.0 * r);

    // Local-variance anchors in the apex homothet.
    site.w = add(site.y0, scaled(sub(y, site.y0), c2));
    site.w1 = lerp(site.y0, site.w, 1.0 / 3.0);
    site.w2 = lerp(site.y0, site.w, 2.0 / 3.0);
    return site;
}

Scaffold build_scaffold(long long n, int d, double c1, double c2, RandomStream& rs) {
    Scaffold s;
    s.n = n;
    s.d = d;
    s.c1 = c1;
    s.c2 = c2;
    s.r = radius_r(n);
    const std::vector<Vec> ys = pack_sphere(d, s.r, c1, rs);
    s.sites.reserve(ys.size());
    for (const Vec& y : ys) s.sites.push_back(build_site(y, d, s.r, c1, c2));
    return s;
}

void save_scaffold(const Scaffold& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("save_scaffold: cannot open " + path);
    char buf[64];
    out << "gplab-scaffold v1\n";
    out << "n " << s.n << "\n";
    out << "d " << s.d << "\n";
    const auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << key << " " << buf << "\n";
    };
    put("c1", s.c1);
    put("c2", s.c2);
    put("r", s.r);
    out << "m " << s.sites.size() << "\n";
    for (size_t i = 0; i < s.sites.size(); ++i) {
        out << "site " << i << "\n";
        out << "y";
        for (double v : s.sites[i].y) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << " " << buf;
        }
        out << "\n";
    }
    out << "end\n";
}

Scaffold load_scaffold(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScaffoldFormatError("load_scaffold: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "gplab-scaffold v1") {
        throw ScaffoldFormatError("load_scaffold: bad header");
    }
    Scaffold s;
    size_t m = 0;
    const auto next_kv = [&](const char* key) -> std::string {
        if (!std::getline(in, line)) throw ScaffoldFormatError("load_scaffold: truncated file");
        std::istringstream is(line);
        std::string k;
        is >> k;
        if (k != key) throw ScaffoldFormatError(std::string("load_scaffold: expected ") + key);
        std::string rest;
        std::getline(is, rest);
        return rest;
    };
    s.n = std::stoll(next_kv("n"));
    s.d = std::stoi(next_kv("d"));
    s.c1 = std::stod(next_kv("c1"));
    s.c2 = std::stod(next_kv("c2"));
    s.r = std::stod(next_kv("r"));
    m = static_cast<size_t>(std::stoull(next_kv("m")));
    for (size_t i = 0; i < m; ++i) {
        next_kv("site");
        std::string ys = next_kv("y");
        std::istringstream is(ys);
        Vec y;
        double v;
        while (is >> v) y.push_back(v);
        if (static_cast<int>(y.size()) != s.d) {
            throw ScaffoldFormatError("load_scaffold: site vector has wrong dimension");
        }
        s.sites.push_back(build_site(y, s.d, s.r, s.c1, s.c2));
    }
    return s;
}

ConeContainmentReport check_cone_containment(const Scaffold& s) {
    ConeContainmentReport report;
    const int d = s.d;
    for (size_t i = 0; i < s.sites.size(); ++i) {
        const SiteFrame& si = s.sites[i];
        // Generator matrix columns z^j - z^0.
        double m[kMaxDim * kMaxDim];
        auto z0 = si.z.point(0);
        for (int j = 1; j <= d; ++j) {
            auto zj = si.z.point(static_cast<size_t>(j));
            for (int k = 0; k < d; ++k) m[k * d + (j - 1)] = zj[k] - z0[k];
        }
        const SquareLU lu = SquareLU::factor(m, d);
        if (lu.singular) {
            report.violations.push_back(ConeViolation{static_cast<int>(i), -1, -1});
            continue;
        }
        for (size_t k = 0; k < s.sites.size(); ++k) {
            if (k == i) continue;
            const SiteFrame& sk = s.sites[k];
            for (int t = 0; t <= d; ++t) {
                auto v = sk.delta.vertex(t);
                double rhs[kMaxDim], lam[kMaxDim];
                for (int c = 0; c < d; ++c) rhs[c] = v[c] - z0[c];
                lu.solve(rhs, lam);
                ++report.checks;
                for (int c = 0; c < d; ++c) {
                    if (lam[c] < -1e-9) {
                        report.violations.push_back(
                            ConeViolation{static_cast<int>(i), static_cast<int>(k), t});
                        break;
                    }
                }
            }
        }
    }
    return report;
}

namespace {

bool event_counts(const SiteFrame& site, const PointCloud& pts, bool prefilter_radius) {
    const int d = site.dim;
    double rho2 = site.r * site.r;
    if (prefilter_radius) {
        // offsets are negative by construction, so offset^2 is the squared
        // distance of the side hyperplane from the origin
        for (const HalfSpace& h : site.h_side) rho2 = std::min(rho2, h.offset * h.offset);
    }
    int union_count = 0;
    int homothet_count[kMaxDim + 1] = {};
    for (size_t idx = 0; idx < pts.size(); ++idx) {
        auto x = pts.point(idx);
        if (prefilter_radius && norm2(x) < rho2) continue;
        if (!site.in_forbidden_union(x)) continue;
        ++union_count;
        if (union_count > d + 1) return false;
        for (int j = 0; j <= d; ++j) {
            if (site.delta_j_member[static_cast<size_t>(j)].contains(x)) {
                if (++homothet_count[j] > 1) return false;
                break;  // the homothets are disjoint
            }
        }
    }
    if (union_count != d + 1) return false;
    for (int j = 0; j <= d; ++j) {
        if (homothet_count[j] != 1) return false;
    }
    return true;
}

}  // namespace

bool event_indicator(const PointCloud& cloud, const SiteFrame& site) {
    return event_counts(site, cloud, /*prefilter_radius=*/true);
}

bool event_indicator_tail(const PointCloud& tail_points, const SiteFrame& site) {
    return event_counts(site, tail_points, /*prefilter_radius=*/false);
}

double event_shell_radius(const SiteFrame& site) {
    // {<u,x> <= b} with unit u and b < 0 lies outside the ball of radius |b|.
    double rho = site.r;
    for (const HalfSpace& h : site.h_side) rho = std::min(rho, -h.offset);
    return rho;
}

bool tail_evaluation_valid(const SiteFrame& site) {
    const double rho = event_shell_radius(site);
    return rho > 0.0 && rho >= site.r - 1.0;
}

EventAuditReport estimate_event_probability(long long n, int d, double c1, double c2,
                                            long long reps, RandomStream& rs) {
    if (reps < 1) throw TooFewSamples("estimate_event_probability: need reps >= 1");
    const Scaffold scaffold = build_scaffold(n, d, c1, c2, rs);
    EventAuditReport rep;
    rep.n = n;
    rep.d = d;
    rep.c1 = c1;
    rep.c2 = c2;
    rep.reps = reps;
    rep.m = scaffold.m();
    rep.site_counts.assign(scaffold.m(), 0);
    for (long long t = 0; t < reps; ++t) {
        const PointCloud cloud = gaussian_cloud(n, d, rs);
        for (size_t i = 0; i < scaffold.m(); ++i) {
            if (event_indicator(cloud, scaffold.sites[i])) {
                ++rep.site_counts[i];
                ++rep.pooled_count;
            }
        }
    }
    const long long trials = reps * static_cast<long long>(scaffold.m());
    rep.pooled_estimate = static_cast<double>(rep.pooled_count) / static_cast<double>(trials);
    rep.pooled_std_error = binomial_std_error(rep.pooled_estimate, trials);
    rep.pooled_ci = clopper_pearson(rep.pooled_count, trials);
    if (!scaffold.sites.empty()) {
        const SiteFrame& s0 = scaffold.sites[0];
        rep.gamma_delta = gaussian_measure_simplex(s0.delta, 20000, rs);
        for (const Simplex& sj : s0.delta_j) {
            rep.gamma_delta_j.push_back(gaussian_measure_simplex(sj, 20000, rs));
        }
        for (int ell = 1; ell <= d; ++ell) {
            rep.local_variance.push_back(
                local_variance_estimate(s0, ell, 300, ell < d ? 200 : 1, rs));
        }
    }
    return rep;
}

ApexRegions::ApexRegions(const SiteFrame& site, int ell)
    : site_(site), ell_(ell), delta0_member_(site.delta_j[0]) {
    polar_.apex.assign(site.dim, 0.0);
    polar_.axis = scaled(site.cone_outer.axis, -1.0);
    polar_.half_angle = 0.5 * M_PI - site.cone_outer.half_angle;
    // Admissible subspaces stay well inside the polar cone: near its
    // boundary the hyperplane normal is almost orthogonal to the outer-cone
    // directions and the wedge G escapes the apex homothet. A fixed
    // fraction of the polar angle bounds the wedge's lateral reach by
    // (8/9) c2, inside the homothet's half-width sqrt(2) c2 at every n.
    admissible_half_angle_ = 0.25 * polar_.half_angle;
}

bool ApexRegions::in_r1(std::span<const double> x) const {
    if (!delta0_member_.contains(x)) return false;
    const Vec dir = sub(site_.w1, x);
    return site_.cone_outer.contains_direction(dir);
}

bool ApexRegions::in_r2(std::span<const double> x) const {
    if (!delta0_member_.contains(x)) return false;
    const Vec dir = sub(x, site_.w2);
    return site_.cone_outer.contains_direction(dir);
}

bool ApexRegions::admissible(const Subspace& L) const {
    // Interior to the polar cone (with depth), so the hyperplane through w2
    // with normal in L meets the outer cone only at the origin and the
    // wedge G stays inside the apex homothet.
    return angle_to_subspace(polar_.axis, L) <= admissible_half_angle_;
}

Subspace ApexRegions::sample_admissible_subspace(RandomStream& rs, long long max_tries) const {
    for (long long t = 0; t < max_tries; ++t) {
        Subspace L = sample_subspace(site_.dim, ell_, rs);
        if (admissible(L)) return L;
    }
    throw RejectionBudgetExceeded("sample_admissible_subspace: no admissible subspace found");
}

bool ApexRegions::GRegion::contains(std::span<const double> x) const {
    if (dot(x, e1) < threshold - kGeomTol) return false;
    const Vec dir = sub(x, owner->site_.w1);
    return owner->site_.cone_outer.contains_direction(dir);
}

ApexRegions::GRegion ApexRegions::make_g_region(const Subspace& L) const {
    GRegion g;
    g.owner = this;
    g.e1.assign(site_.dim, 0.0);
    // Unit projection of the polar axis onto L, expressed in ambient
    // coordinates; admissibility puts it inside the open polar cone.
    for (int k = 0; k < L.dim_sub; ++k) {
        const double c = dot(polar_.axis, L.basis_vec(k));
        auto bk = L.basis_vec(k);
        for (int t = 0; t < site_.dim; ++t) g.e1[t] += c * bk[t];
    }
    if (!normalize(g.e1.data(), site_.dim)) {
        throw ConstructionFailure("make_g_region: subspace orthogonal to the polar axis");
    }
    g.threshold = dot(site_.w2, g.e1);
    return g;
}

PointCloud site_base_points(const SiteFrame& site) {
    PointCloud f(site.dim);
    for (int j = 1; j <= site.dim; ++j) f.push(site.z.point(static_cast<size_t>(j)));
    return f;
}

LocalVarianceEstimate local_variance_estimate(const SiteFrame& site, int ell,
                                              long long reps, long long n_subspaces,
                                              RandomStream& rs, const double* fixed_z) {
    if (reps < 2) throw TooFewSamples("local_variance_estimate: need reps >= 2");
    const int d = site.dim;
    std::vector<Subspace> subs;
    subs.reserve(static_cast<size_t>(n_subspaces));
    for (long long i = 0; i < n_subspaces; ++i) subs.push_back(sample_subspace(d, ell, rs));

    const PointCloud f = site_base_points(site);
    const RestrictedGaussianSampler sampler(site.delta_j[0]);
    std::vector<double> values;
    values.reserve(static_cast<size_t>(reps));
    for (long long t = 0; t < reps; ++t) {
        Vec z;
        if (fixed_z != nullptr) {
            z.assign(fixed_z, fixed_z + d);
        } else {
            z = sampler.sample(rs);
        }
        values.push_back(local_functional(z, f, site.cone_outer, ell, subs));
    }
    LocalVarianceEstimate est;
    est.reps = reps;
    est.n_subspaces = n_subspaces;
    est.mean = sample_mean(values);
    est.variance = sample_variance(values);
    est.variance_ci = bootstrap_ci(
        values, [](std::span<const double> xs) { return sample_variance(xs); },
        kBootstrapResamples, rs);
    return est;
}

}  // namespace gplab
