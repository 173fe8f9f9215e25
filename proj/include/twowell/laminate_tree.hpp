#pragma once

#include <cmath>
#include <memory>
#include <utility>

#include "twowell/error.hpp"
#include "twowell/mat.hpp"
#include "twowell/wells.hpp"

namespace twowell {

/// Weighted rank-one splitting tree with leaves in K. At a node,
///   matrix = zeta * plus->matrix + (1 - zeta) * minus->matrix,
///   plus->matrix - minus->matrix = a (x) n,  |n| = 1.
struct LaminateTree {
    Mat2 matrix;
    bool leaf = true;
    int well = 0;  // leaf only: 0 = SO(2), 1 = SO(2)H

    double zeta = 0.0;
    Vec2 a{}, n{};
    std::unique_ptr<LaminateTree> plus, minus;

    static LaminateTree make_leaf(const Mat2& m, int well_tag) {
        LaminateTree t;
        t.matrix = m;
        t.leaf = true;
        t.well = well_tag;
        return t;
    }

    static LaminateTree make_node(const Mat2& m, double zeta, Vec2 a, Vec2 n,
                                  LaminateTree child_plus, LaminateTree child_minus) {
        LaminateTree t;
        t.matrix = m;
        t.leaf = false;
        t.zeta = zeta;
        t.a = a;
        t.n = n;
        t.plus = std::make_unique<LaminateTree>(std::move(child_plus));
        t.minus = std::make_unique<LaminateTree>(std::move(child_minus));
        return t;
    }

    int depth() const {
        if (leaf) return 0;
        return 1 + std::max(plus->depth(), minus->depth());
    }

    /// Weighted sum of the leaves; reconstructs `matrix` for a valid tree.
    Mat2 leaf_average() const {
        if (leaf) return matrix;
        return zeta * plus->leaf_average() + (1.0 - zeta) * minus->leaf_average();
    }

    LaminateTree clone() const {
        LaminateTree t;
        t.matrix = matrix;
        t.leaf = leaf;
        t.well = well;
        t.zeta = zeta;
        t.a = a;
        t.n = n;
        if (plus) t.plus = std::make_unique<LaminateTree>(plus->clone());
        if (minus) t.minus = std::make_unique<LaminateTree>(minus->clone());
        return t;
    }
};

/// Factors a (numerically) rank-one matrix as a (x) n with unit n.
/// The rows of a (x) n are a_i * n, so n comes from the larger row.
inline std::pair<Vec2, Vec2> rank_one_factors(const Mat2& d) {
    const Vec2 r1{d.m11, d.m12}, r2{d.m21, d.m22};
    Vec2 n = norm2(r1) >= norm2(r2) ? r1 : r2;
    const double nn = norm(n);
    if (nn < 1e-14) throw numeric_error("rank_one_factors: zero matrix");
    n = n / nn;
    return {{dot(r1, n), dot(r2, n)}, n};
}

namespace detail {

/// Decomposition of a point on the depth-1 locus {|x| + |y| = 1}:
/// X = |x| R_ang(x) + |y| R_ang(y) H, a rank-one segment between the wells.
/// Points with |x| = 0 or |y| = 0 are leaves.
inline LaminateTree decompose_boundary(const Mat2& X, const TwoWellParams& p, double tol) {
    const HullCoords hc = hull_coordinates(X, p);
    const double sx = norm(hc.x), sy = norm(hc.y);
    if (sy <= tol) return LaminateTree::make_leaf(conformal(hc.x / sx), 0);
    if (sx <= tol) return LaminateTree::make_leaf(conformal(hc.y / sy) * p.H(), 1);
    const Mat2 A = conformal(hc.x / sx);
    const Mat2 B = conformal(hc.y / sy) * p.H();
    const auto [a, n] = rank_one_factors(A - B);
    return LaminateTree::make_node(X, sx, a, n, LaminateTree::make_leaf(A, 0),
                                   LaminateTree::make_leaf(B, 1));
}

/// |x| + |y| along the pencil X + s D in hull coordinates (affine in s,
/// hence convex); crosses 1 exactly once on each side of an interior point.
struct HullRadius {
    HullCoords base, dir;
    double operator()(double s) const {
        return norm(base.x + s * dir.x) + norm(base.y + s * dir.y);
    }
};

inline double bisect_to_sphere(const HullRadius& t, double lo, double hi) {
    // pre: t(lo) < 1 <= t(hi), lo and hi on the same side of 0
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (t(mid) < 1.0)
            lo = mid;
        else
            hi = mid;
        if (std::abs(hi - lo) < 1e-15 * (1.0 + std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Finite laminate recipe for a matrix in Z_min.
///
/// Depth 0 if R is in K; depth 1 if |x| + |y| = 1 (R lies on a rank-one
/// segment between the wells); otherwise depth 2: scan rank-one directions
/// n, pick a = J cof(R) n so that det(R + s a(x)n) = 1 for every s, expand
/// both ways until |x| + |y| = 1 (bisection), and decompose the endpoints.
/// Directions whose endpoints both split with the same twin family
/// (angle(y) - angle(x) = +theta*) are preferred; they admit a single
/// mesh alignment downstream.
inline LaminateTree laminate_decompose(const Mat2& R, const TwoWellParams& p, double tol = 1e-9) {
    const Membership mem = membership(R, p, std::max(tol, 1e-9));
    if (!mem.in_Zmin) throw numeric_error("laminate_decompose: matrix is not in Z_min");

    const double leaf_tol = 1e-10;
    if (dist2_to_coset(R, Mat2::identity()) <= leaf_tol * leaf_tol)
        return LaminateTree::make_leaf(R, 0);
    if (dist2_to_coset(R, p.H()) <= leaf_tol * leaf_tol) return LaminateTree::make_leaf(R, 1);

    const HullCoords hc = hull_coordinates(R, p);
    const double s1 = norm(hc.x) + norm(hc.y);
    if (std::abs(s1 - 1.0) <= 1e-8) return detail::decompose_boundary(R, p, tol);

    // interior point: depth-2 search over rank-one directions
    const Mat2 cofR = cof(R);
    const double ts = p.connection_angle();
    auto endpoint_family_plus = [&](const Mat2& X) {
        const HullCoords h = hull_coordinates(X, p);
        if (norm(h.x) <= 1e-9 || norm(h.y) <= 1e-9) return true;  // leaf endpoint
        const double dang =
            std::remainder(std::atan2(h.y.y, h.y.x) - std::atan2(h.x.y, h.x.x), 2.0 * M_PI);
        return std::abs(dang - ts) < std::abs(dang + ts);
    };

    struct Candidate {
        Mat2 xp, xm;
        double zeta;
        Vec2 a, n;
        bool found = false;
    };
    Candidate first, preferred;
    const int n_dirs = 720;
    for (int k = 0; k < n_dirs && !preferred.found; ++k) {
        const double phi = M_PI * k / n_dirs;
        const Vec2 n{std::cos(phi), std::sin(phi)};
        Vec2 a = perp(cofR * n);
        const double an = norm(a);
        if (an < 1e-12) continue;
        a = a / an;
        const Mat2 D = outer(a, n);
        const detail::HullRadius t{hc, hull_coordinates(D, p)};

        double hi = 1.0;
        while (t(hi) < 1.0 && hi < 1e6) hi *= 2.0;
        double lo = -1.0;
        while (t(lo) < 1.0 && lo > -1e6) lo *= 2.0;
        if (t(hi) < 1.0 || t(lo) < 1.0) continue;
        const double sp = detail::bisect_to_sphere(t, 0.0, hi);
        const double sm = detail::bisect_to_sphere(t, 0.0, lo);
        if (!(sp > 0.0 && sm < 0.0)) continue;

        Candidate c;
        c.xp = R + sp * D;
        c.xm = R + sm * D;
        c.zeta = -sm / (sp - sm);
        c.a = (sp - sm) * a;
        c.n = n;
        c.found = true;
        if (!first.found) first = c;
        if (endpoint_family_plus(c.xp) && endpoint_family_plus(c.xm)) preferred = c;
    }
    const Candidate& c = preferred.found ? preferred : first;
    if (!c.found) throw numeric_error("decomposition not found: direction scan exhausted");

    LaminateTree tree = LaminateTree::make_node(R, c.zeta, c.a, c.n,
                                                detail::decompose_boundary(c.xp, p, tol),
                                                detail::decompose_boundary(c.xm, p, tol));
    const Mat2 err = tree.leaf_average() - R;
    if (frobenius(err) > 1e-8) throw numeric_error("decomposition not found: reconstruction failed");
    return tree;
}

}  // namespace twowell
