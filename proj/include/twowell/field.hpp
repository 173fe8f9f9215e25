#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "twowell/energy.hpp"
#include "twowell/error.hpp"
#include "twowell/laminate_tree.hpp"
#include "twowell/mat.hpp"
#include "twowell/wells.hpp"

namespace twowell {

/// Cell diagonal orientation. `anti` cuts from (i+1, j) to (i, j+1), a
/// falling diagonal, which follows the level lines of x + mu*y; `main`
/// cuts from (i, j) to (i+1, j+1) for the x - mu*y family.
enum class Diag : std::uint8_t { anti = 0, main = 1 };

/// Piecewise-affine deformation of the unit square on a structured
/// nx x ny triangulation (two triangles per cell) with affine boundary
/// data u = R x + b on the boundary when `pinned`.
struct DeformationField {
    int nx = 0, ny = 0;
    Mat2 R = Mat2::identity();
    Vec2 b{};
    bool pinned = false;
    double eps = 0.0;  // blend-layer width used at construction, 0 = none
    Diag default_diag = Diag::anti;
    std::vector<std::uint8_t> cell_diag;  // per-cell override; empty = uniform
    std::vector<Vec2> deformed;           // (nx+1)*(ny+1), row-major by j

    std::size_t vid(int i, int j) const {
        return static_cast<std::size_t>(j) * (nx + 1) + i;
    }
    Vec2 ref(int i, int j) const {
        return {static_cast<double>(i) / nx, static_cast<double>(j) / ny};
    }
    int n_vertices() const { return (nx + 1) * (ny + 1); }
    int n_triangles() const { return 2 * nx * ny; }

    Diag diag(int i, int j) const {
        if (cell_diag.empty()) return default_diag;
        return static_cast<Diag>(cell_diag[static_cast<std::size_t>(j) * nx + i]);
    }

    /// Vertex indices (i, j) of triangle t; t = 2*cell + {0, 1}.
    std::array<std::array<int, 2>, 3> triangle(int t) const {
        const int cell = t / 2, which = t % 2;
        const int i = cell % nx, j = cell / nx;
        if (diag(i, j) == Diag::anti) {
            if (which == 0) return {{{i, j}, {i + 1, j}, {i, j + 1}}};
            return {{{i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
        }
        if (which == 0) return {{{i, j}, {i + 1, j}, {i + 1, j + 1}}};
        return {{{i, j}, {i + 1, j + 1}, {i, j + 1}}};
    }

    /// Affine-map gradient on triangle t.
    Mat2 gradient(int t) const {
        const auto tri = triangle(t);
        const Vec2 p0 = ref(tri[0][0], tri[0][1]);
        const Vec2 p1 = ref(tri[1][0], tri[1][1]);
        const Vec2 p2 = ref(tri[2][0], tri[2][1]);
        const Vec2 q0 = deformed[vid(tri[0][0], tri[0][1])];
        const Vec2 q1 = deformed[vid(tri[1][0], tri[1][1])];
        const Vec2 q2 = deformed[vid(tri[2][0], tri[2][1])];
        const Mat2 dm{p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y};
        const Mat2 ds{q1.x - q0.x, q2.x - q0.x, q1.y - q0.y, q2.y - q0.y};
        return ds * inverse(dm);
    }

    /// All triangles have the same reference area.
    double triangle_area() const { return 0.5 / (static_cast<double>(nx) * ny); }

    /// Affine map everywhere: u = M p + b.
    static DeformationField affine(int nx, int ny, const Mat2& M, Vec2 b = {}) {
        if (nx < 1 || ny < 1) throw config_error("DeformationField: grid sizes must be positive");
        DeformationField f;
        f.nx = nx;
        f.ny = ny;
        f.R = M;
        f.b = b;
        f.pinned = true;
        f.deformed.resize(static_cast<std::size_t>(f.n_vertices()));
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) f.deformed[f.vid(i, j)] = M * f.ref(i, j) + b;
        return f;
    }
};

namespace detail {

/// 1-periodic-per-P sawtooth: slope (1 - zeta) on [0, zeta P), slope -zeta
/// on [zeta P, P), zero at every multiple of P. Peak value zeta(1-zeta)P.
inline double sawtooth(double s, double period, double zeta) {
    const double q = std::floor(s / period);
    const double tau = s / period - q;
    const double val = tau < zeta ? (1.0 - zeta) * tau : zeta * (1.0 - tau);
    return period * val;
}

/// Band-local taper: 1 in the band interior, linear ramp to 0 within
/// `width` of either band edge (band = [0, len] in local coordinates).
inline double taper(double local, double len, double width) {
    const double d = std::min(local, len - local);
    if (d <= 0.0) return 0.0;
    return std::min(1.0, d / width);
}

/// Sign-normalizes (a, n) so n.x > 0 (or n.y > 0 if n.x == 0) and returns
/// the profile functional m = n / n.x, so that kinks of h(p . m) are level
/// lines of x + (n.y/n.x) y. a (x) n == (n.x a) (x) m.
struct Profile {
    Vec2 d;  // displacement direction, d (x) m = a (x) n
    Vec2 m;  // profile functional
    static Profile from(Vec2 a, Vec2 n) {
        if (n.x < 0.0 || (n.x == 0.0 && n.y < 0.0)) {
            a = -a;
            n = -n;
        }
        if (std::abs(n.x) < 1e-12 * std::abs(n.y))
            return {a * n.y, {n.x / n.y, 1.0}};
        return {a * n.x, {1.0, n.y / n.x}};
    }
};

}  // namespace detail

/// Realizes a depth <= 2 laminate tree as a deformation of the unit square
/// with exact affine boundary values R x + b.
///
/// Gradients oscillate between the children across bands of x . n = const
/// (period 1/N for the root, 1/N^2 for nested children, measured in the
/// normalized functional x + (n2/n1) y); a boundary layer of width `cutoff`
/// blends the oscillation displacement to zero so the boundary is pinned
/// exactly.
///
/// Band interfaces are level lines with normal n ~ (1, +-mu). When
/// ny == mu * nx the cell diagonals run along the interfaces, and with
/// kinks on mesh lines (nx a multiple of N with zeta*nx/N integral) every
/// triangle outside the blend layer carries exactly one well gradient.
inline DeformationField build_laminate_field(const LaminateTree& tree, int frequency,
                                             double cutoff, int nx, int ny, Vec2 b = {}) {
    if (frequency < 1) throw config_error("build_laminate_field: frequency must be >= 1");
    if (nx < 1 || ny < 1 || nx % frequency != 0 || ny % frequency != 0)
        throw config_error("build_laminate_field: grid sizes must be positive multiples of the frequency");
    if (!(cutoff > 0.0 && cutoff < 0.5))
        throw config_error("build_laminate_field: cutoff must lie in (0, 1/2)");
    if (tree.depth() > 2) throw config_error("build_laminate_field: tree depth exceeds 2");

    if (tree.leaf) {
        DeformationField f = DeformationField::affine(nx, ny, tree.matrix, b);
        f.eps = cutoff;
        return f;
    }

    DeformationField f;
    f.nx = nx;
    f.ny = ny;
    f.R = tree.matrix;
    f.b = b;
    f.pinned = true;
    f.eps = cutoff;
    f.deformed.resize(static_cast<std::size_t>(f.n_vertices()));

    const auto outer = detail::Profile::from(tree.a, tree.n);
    const double period0 = 1.0 / frequency;
    const bool nested = !tree.plus->leaf || !tree.minus->leaf;

    struct Inner {
        bool active = false;
        detail::Profile prof;
        double zeta = 0.0;
    };
    Inner inner_plus, inner_minus;
    if (!tree.plus->leaf) {
        inner_plus = {true, detail::Profile::from(tree.plus->a, tree.plus->n), tree.plus->zeta};
    }
    if (!tree.minus->leaf) {
        inner_minus = {true, detail::Profile::from(tree.minus->a, tree.minus->n), tree.minus->zeta};
    }
    const double period1 = 1.0 / (static_cast<double>(frequency) * frequency);
    const double zeta0 = tree.zeta;

    auto oscillation = [&](Vec2 p) {
        const double s0 = dot(p, outer.m);
        Vec2 osc = outer.d * detail::sawtooth(s0, period0, zeta0);
        if (nested) {
            const double tau = s0 / period0 - std::floor(s0 / period0);
            const bool in_plus = tau < zeta0;
            const Inner& in = in_plus ? inner_plus : inner_minus;
            if (in.active) {
                const double band_len = (in_plus ? zeta0 : 1.0 - zeta0) * period0;
                const double local = (in_plus ? tau : tau - zeta0) * period0;
                const double w = detail::taper(local, band_len, std::min(0.25 * band_len, period1));
                osc = osc + in.prof.d * (w * detail::sawtooth(dot(p, in.prof.m), period1, in.zeta));
            }
        }
        return osc;
    };

    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const Vec2 p = f.ref(i, j);
            const double d_boundary = std::min(std::min(p.x, 1.0 - p.x), std::min(p.y, 1.0 - p.y));
            const double w = std::max(0.0, 1.0 - d_boundary / cutoff);
            const Vec2 u = tree.matrix * p + b + (1.0 - w) * oscillation(p);
            f.deformed[f.vid(i, j)] = u;
        }

    // mesh diagonals follow the laminate's interface family
    auto family = [](const detail::Profile& pr) {
        return pr.m.x * pr.m.y >= 0.0 ? Diag::anti : Diag::main;
    };
    if (!nested) {
        f.default_diag = family(outer);
    } else {
        // per-cell: align with the oscillation active at the cell center
        f.cell_diag.resize(static_cast<std::size_t>(nx) * ny);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const Vec2 c{(i + 0.5) / nx, (j + 0.5) / ny};
                const double tau = dot(c, outer.m) / period0 -
                                   std::floor(dot(c, outer.m) / period0);
                const bool in_plus = tau < zeta0;
                const Inner& in = in_plus ? inner_plus : inner_minus;
                const Diag d = in.active ? family(in.prof) : family(outer);
                f.cell_diag[static_cast<std::size_t>(j) * nx + i] = static_cast<std::uint8_t>(d);
            }
    }
    return f;
}

/// Per-triangle gradient statistics against the two wells.
struct FieldStats {
    double fraction_in_K = 0.0;    // triangles with dist(grad, K) <= tol
    double l2_dist_to_K = 0.0;     // sqrt(sum area * dist^2)
    double well_fraction[2] = {0.0, 0.0};  // nearest-coset histogram
    double det_min = 0.0, det_max = 0.0;   // over all triangles
    double det_min_nonblend = 0.0, det_max_nonblend = 0.0;
    double boundary_error = 0.0;   // max |u - (R x + b)| on boundary vertices
    long n_triangles = 0;
    long n_nonblend = 0;
};

inline FieldStats field_gradient_stats(const DeformationField& f, const TwoWellParams& p,
                                       double tol = 1e-9) {
    FieldStats st;
    st.n_triangles = f.n_triangles();
    st.det_min = st.det_min_nonblend = std::numeric_limits<double>::infinity();
    st.det_max = st.det_max_nonblend = -std::numeric_limits<double>::infinity();
    const Mat2 H = p.H();
    const double area = f.triangle_area();
    long in_k = 0;
    long well_count[2] = {0, 0};
    double l2 = 0.0;

    auto blend_free = [&](const std::array<std::array<int, 2>, 3>& tri) {
        if (f.eps <= 0.0) return true;
        for (const auto& ij : tri) {
            const Vec2 q = f.ref(ij[0], ij[1]);
            const double d = std::min(std::min(q.x, 1.0 - q.x), std::min(q.y, 1.0 - q.y));
            if (d < f.eps - 1e-14) return false;
        }
        return true;
    };

    for (int t = 0; t < f.n_triangles(); ++t) {
        const Mat2 g = f.gradient(t);
        const double d0 = dist2_to_coset(g, Mat2::identity());
        const double d1 = dist2_to_coset(g, H);
        const double din = std::sqrt(std::min(d0, d1));
        if (din <= tol) ++in_k;
        ++well_count[d0 <= d1 ? 0 : 1];
        l2 += area * din * din;
        const double dg = det(g);
        st.det_min = std::min(st.det_min, dg);
        st.det_max = std::max(st.det_max, dg);
        if (blend_free(f.triangle(t))) {
            ++st.n_nonblend;
            st.det_min_nonblend = std::min(st.det_min_nonblend, dg);
            st.det_max_nonblend = std::max(st.det_max_nonblend, dg);
        }
    }
    st.fraction_in_K = static_cast<double>(in_k) / st.n_triangles;
    st.well_fraction[0] = static_cast<double>(well_count[0]) / st.n_triangles;
    st.well_fraction[1] = static_cast<double>(well_count[1]) / st.n_triangles;
    st.l2_dist_to_K = std::sqrt(l2);

    for (int j = 0; j <= f.ny; ++j)
        for (int i = 0; i <= f.nx; ++i) {
            if (i != 0 && i != f.nx && j != 0 && j != f.ny) continue;
            const Vec2 target = f.R * f.ref(i, j) + f.b;
            st.boundary_error =
                std::max(st.boundary_error, norm(f.deformed[f.vid(i, j)] - target));
        }
    return st;
}

/// Exact integral of F(grad u) for the piecewise-affine field.
inline double field_energy(const DeformationField& f, const EnergyModel& model) {
    const double area = f.triangle_area();
    double e = 0.0;
    for (int t = 0; t < f.n_triangles(); ++t) e += area * model.eval(f.gradient(t));
    return e;
}

}  // namespace twowell
