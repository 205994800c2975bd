#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gplab/geometry.hpp"
#include "gplab/grassmann.hpp"
#include "gplab/random.hpp"
#include "gplab/sampling.hpp"
#include "gplab/stats.hpp"

namespace gplab {

// r(n) = sqrt(2 log n - log log n), natural logs. Throws InvalidN for n < 3.
double radius_r(long long n);

// Greedy maximal packing on the sphere of radius r: uniform candidates are
// accepted when at least 2*c1 from every accepted point; stops after
// 10^4 * d consecutive rejections (the maximality witness).
std::vector<Vec> pack_sphere(int d, double r, double c1, RandomStream& rs);

inline constexpr long long kPackingWitness = 10000;

// The full local construction at one packing point y on S(r):
// tangent-plane regular simplex, apex, homothets, separating half-spaces,
// cones, canonical points and the local-variance anchors.
struct SiteFrame {
    int dim = 0;
    double r = 0.0, c1 = 0.0, c2 = 0.0;

    Vec y;              // packing point, |y| = r
    Vec y0;             // apex (1 + r^-2) y
    PointCloud ys;      // tangent simplex vertices y^1..y^d, on S^{d-2}(y, sqrt 2)
    Simplex delta;      // [y0, y^1..y^d]; vertex 0 is the apex
    std::vector<Simplex> delta_j;  // homothets j = 0..d, factor c2 centred at vertex j
    HalfSpace h_plus;   // side of the tangent hyperplane away from the origin
    std::vector<HalfSpace> h_side;  // H^1..H^d separating tangent half-spaces
    PointCloud d_generators;        // y^j - y0, j = 1..d
    CircularCone cone_inner;  // C(y - z0, arctan(r/(d-1)))
    CircularCone cone_outer;  // C(y - z0, arctan(2r))
    PointCloud z;             // canonical points: centroids of the homothets
    Vec w;                    // centre of the base facet of delta_j[0]
    Vec w1, w2;               // (2/3)y0 + (1/3)w and (1/3)y0 + (2/3)w

    std::vector<SimplexMembership> delta_j_member;

    // True when x lies in h_plus or any of the side half-spaces (the region
    // that must hold exactly d+1 sample points).
    bool in_forbidden_union(std::span<const double> x) const;
};

SiteFrame build_site(const Vec& y, int d, double r, double c1, double c2);

struct Scaffold {
    long long n = 0;
    int d = 0;
    double r = 0.0, c1 = 0.0, c2 = 0.0;
    std::vector<SiteFrame> sites;

    size_t m() const { return sites.size(); }
};

Scaffold build_scaffold(long long n, int d, double c1, double c2, RandomStream& rs);

// Plain-text scaffold format (versioned); the loader rebuilds sites from the
// stored packing points, which reproduces identical geometry bit for bit.
void save_scaffold(const Scaffold& s, const std::string& path);
Scaffold load_scaffold(const std::string& path);

struct ConeViolation {
    int site_i = 0;
    int site_k = 0;
    int vertex = 0;
};

struct ConeContainmentReport {
    long long checks = 0;
    std::vector<ConeViolation> violations;
    bool ok() const { return violations.empty(); }
};

// For every ordered pair (i, k != i): do all vertices of Delta_k lie in the
// translated cone z_i^0 + pos(z_i^j - z_i^0)? Tested by solving for the cone
// coordinates. Violations are data, not errors.
ConeContainmentReport check_cone_containment(const Scaffold& s);

// Does the cloud put exactly one point in each homothet and exactly d+1
// points in the forbidden union?
bool event_indicator(const PointCloud& cloud, const SiteFrame& site);

// Same test fed only the points with |x| >= event_shell_radius(site); all
// event regions lie outside that ball, so the result matches
// event_indicator on the full cloud.
bool event_indicator_tail(const PointCloud& tail_points, const SiteFrame& site);

// Radius of the largest origin-centred ball disjoint from every event
// region of the site: min of r and the side half-space distances.
double event_shell_radius(const SiteFrame& site);

// True when the shell radius is close enough to r for shell-restricted
// sampling to stay cheap (within 1 of r).
bool tail_evaluation_valid(const SiteFrame& site);

struct LocalVarianceEstimate {
    double variance = 0.0;
    Interval variance_ci;
    double mean = 0.0;
    long long reps = 0;
    long long n_subspaces = 0;
};

struct EventAuditReport {
    long long n = 0;
    int d = 0;
    double c1 = 0.0, c2 = 0.0;
    long long reps = 0;
    size_t m = 0;
    std::vector<long long> site_counts;     // event occurrences per site
    long long pooled_count = 0;
    double pooled_estimate = 0.0;           // pooled_count / (reps * m)
    double pooled_std_error = 0.0;
    Interval pooled_ci;                     // Clopper-Pearson 95%
    std::vector<MCEstimate> gamma_delta_j;  // importance-sampled Gaussian mass per homothet (site 0)
    MCEstimate gamma_delta;                 // mass of Delta itself (site 0)
    std::vector<LocalVarianceEstimate> local_variance;  // per ell = 1..d, site 0
};

// Builds one scaffold, samples `reps` independent Gaussian clouds of size n
// and reports empirical event frequencies. Reference implementation: full
// clouds, no shortcuts.
EventAuditReport estimate_event_probability(long long n, int d, double c1, double c2,
                                            long long reps, RandomStream& rs);

// The local-perturbation geometry of one site: the cone-capped regions next to the
// apex, the separating hyperplane data and the wedge G used for the
// projection lower bound.
class ApexRegions {
public:
    ApexRegions(const SiteFrame& site, int ell);

    bool in_r1(std::span<const double> x) const;
    bool in_r2(std::span<const double> x) const;

    // Haar rejection until the subspace admits a hyperplane normal inside
    // the interior of the polar of the outer cone.
    Subspace sample_admissible_subspace(RandomStream& rs, long long max_tries = 100000) const;
    bool admissible(const Subspace& L) const;

    struct GRegion {
        Vec e1;            // unit normal of the separating hyperplane, in L
        double threshold;  // <w2, e1>
        const ApexRegions* owner;
        bool contains(std::span<const double> x) const;
    };
    GRegion make_g_region(const Subspace& L) const;

    const CircularCone& polar_cone() const { return polar_; }
    double admissible_half_angle() const { return admissible_half_angle_; }
    const SiteFrame& site() const { return site_; }
    int ell() const { return ell_; }

private:
    const SiteFrame& site_;
    int ell_;
    CircularCone polar_;  // polar of the outer cone: C(-axis, pi/2 - half_angle)
    double admissible_half_angle_ = 0.0;
    SimplexMembership delta0_member_;
};

// Variance of the localized functional over Z ~ Gaussian restricted to the
// apex homothet, evaluated on one shared subspace sample. `fixed_z` pins Z
// to a single point (degenerate test hook: the variance must vanish).
LocalVarianceEstimate local_variance_estimate(const SiteFrame& site, int ell,
                                              long long reps, long long n_subspaces,
                                              RandomStream& rs,
                                              const double* fixed_z = nullptr);

// F_i = [z^1..z^d] as a cloud (canonical centroids).
PointCloud site_base_points(const SiteFrame& site);

}  // namespace gplab
