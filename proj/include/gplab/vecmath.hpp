#pragma once

#include <cmath>
#include <cstring>
#include <span>
#include <vector>

namespace gplab {

using Vec = std::vector<double>;

// Hard cap on the ambient dimension. Keeps small linear algebra on the stack.
inline constexpr int kMaxDim = 8;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(norm2(a)); }

inline double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline Vec sub(std::span<const double> a, std::span<const double> b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec add(std::span<const double> a, std::span<const double> b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec scaled(std::span<const double> a, double c) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

// r = a + c*(b - a), the point at parameter c on the segment [a,b].
inline Vec lerp(std::span<const double> a, std::span<const double> b, double c) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + c * (b[i] - a[i]);
    return r;
}

inline bool normalize(double* v, int n, double eps = 1e-14) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += v[i] * v[i];
    s = std::sqrt(s);
    if (s < eps) return false;
    for (int i = 0; i < n; ++i) v[i] /= s;
    return true;
}

// LU factorization with partial pivoting of a dense n x n matrix (row-major),
// n <= kMaxDim. Everything lives on the stack.
struct SquareLU {
    int n = 0;
    double a[kMaxDim * kMaxDim] = {};
    int piv[kMaxDim] = {};
    int sign = 1;
    bool singular = true;

    static SquareLU factor(const double* m, int n, double pivot_eps = 0.0) {
        SquareLU lu;
        lu.n = n;
        std::memcpy(lu.a, m, sizeof(double) * static_cast<size_t>(n * n));
        lu.sign = 1;
        lu.singular = false;
        for (int c = 0; c < n; ++c) {
            int p = c;
            double best = std::fabs(lu.a[c * n + c]);
            for (int r = c + 1; r < n; ++r) {
                const double v = std::fabs(lu.a[r * n + c]);
                if (v > best) { best = v; p = r; }
            }
            lu.piv[c] = p;
            if (best <= pivot_eps) { lu.singular = true; return lu; }
            if (p != c) {
                for (int k = 0; k < n; ++k) std::swap(lu.a[c * n + k], lu.a[p * n + k]);
                lu.sign = -lu.sign;
            }
            const double inv = 1.0 / lu.a[c * n + c];
            for (int r = c + 1; r < n; ++r) {
                const double f = lu.a[r * n + c] * inv;
                lu.a[r * n + c] = f;
                for (int k = c + 1; k < n; ++k) lu.a[r * n + k] -= f * lu.a[c * n + k];
            }
        }
        return lu;
    }

    double det() const {
        if (singular) return 0.0;
        double d = sign;
        for (int i = 0; i < n; ++i) d *= a[i * n + i];
        return d;
    }

    // Solves A x = b. Returns false when the factorization was singular.
    bool solve(const double* b, double* x) const {
        if (singular || n <= 0 || n > kMaxDim) return false;
        double y[kMaxDim];
        std::memcpy(y, b, sizeof(double) * static_cast<size_t>(n));
        // The factorization swaps whole rows, so P A = L U with one
        // permutation applied up front.
        for (int c = 0; c < n; ++c) {
            if (piv[c] != c) std::swap(y[c], y[piv[c]]);
        }
        for (int c = 0; c < n; ++c) {
            for (int r = c + 1; r < n; ++r) y[r] -= a[r * n + c] * y[c];
        }
        for (int r = n - 1; r >= 0; --r) {
            double s = y[r];
            for (int k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
            x[r] = s / a[r * n + r];
        }
        return true;
    }
};

inline double det_small(const double* m, int n) { return SquareLU::factor(m, n).det(); }

// Generalized cross product: unit normal of the hyperplane spanned by the
// d-1 rows of `rows` (each of length d), via cofactor expansion. Returns the
// unnormalized normal's length (0 for a degenerate configuration).
inline double hyperplane_normal(const double* rows, int d, double* normal) {
    double minor[kMaxDim * kMaxDim];
    for (int skip = 0; skip < d; ++skip) {
        for (int r = 0; r < d - 1; ++r) {
            int cc = 0;
            for (int c = 0; c < d; ++c) {
                if (c == skip) continue;
                minor[r * (d - 1) + cc++] = rows[r * d + c];
            }
        }
        const double dm = (d == 1) ? 1.0 : det_small(minor, d - 1);
        normal[skip] = ((skip % 2) == 0) ? dm : -dm;
    }
    double len = 0.0;
    for (int i = 0; i < d; ++i) len += normal[i] * normal[i];
    len = std::sqrt(len);
    if (len > 0.0) {
        for (int i = 0; i < d; ++i) normal[i] /= len;
    }
    return len;
}

// In-place modified Gram-Schmidt with one re-orthogonalization pass.
// `vecs` holds `count` rows of length d. Returns the numerical rank; rows
// past the rank are left unspecified.
inline int gram_schmidt(double* vecs, int count, int d, double drop_tol = 1e-10) {
    int rank = 0;
    for (int i = 0; i < count; ++i) {
        double* v = vecs + i * d;
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < rank; ++j) {
                const double* u = vecs + j * d;
                double p = 0.0;
                for (int k = 0; k < d; ++k) p += v[k] * u[k];
                for (int k = 0; k < d; ++k) v[k] -= p * u[k];
            }
        }
        double len = 0.0;
        for (int k = 0; k < d; ++k) len += v[k] * v[k];
        len = std::sqrt(len);
        if (len <= drop_tol) continue;
        for (int k = 0; k < d; ++k) v[k] /= len;
        if (rank != i) std::memcpy(vecs + rank * d, v, sizeof(double) * static_cast<size_t>(d));
        ++rank;
    }
    return rank;
}

}  // namespace gplab
