#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "twowell/error.hpp"
#include "twowell/mat.hpp"

namespace twowell {

/// Two-well parameters: H = diag(lambda, mu) with 0 < lambda < 1 < mu and
/// lambda * mu = 1 by construction (mu := 1/lambda).
struct TwoWellParams {
    double lambda;
    double mu;

    static TwoWellParams from_lambda(double lambda) {
        if (!(lambda > 0.0 && lambda < 1.0))
            throw config_error("lambda must satisfy 0 < lambda < 1");
        return {lambda, 1.0 / lambda};
    }

    Mat2 H() const { return Mat2::diag(lambda, mu); }

    /// Connection angle theta* = arccos(2/(lambda+mu)): each R_a in SO(2) is
    /// rank-one connected exactly with R_{a +- theta*} H in the other well.
    double connection_angle() const { return std::acos(2.0 / (lambda + mu)); }
};

/// Coordinates (x, y) of X = C(x) + C(y) H, the parametrization in which
///   K^c   = { |x| + |y| <= 1 }
///   Z_min = K^c intersected with { |x|^2 + |y|^2 + (lambda+mu)<x,y> = 1 },
/// and the constraint value equals det X.
struct HullCoords {
    Vec2 x;
    Vec2 y;
};

/// Unique (x, y) with X = C(x) + C(y) H; entrywise the system is triangular:
/// rows give (mu-lambda) y and then x directly.
inline HullCoords hull_coordinates(const Mat2& X, const TwoWellParams& p) {
    const double d = p.mu - p.lambda;
    HullCoords hc;
    hc.y.x = (X.m22 - X.m11) / d;
    hc.x.x = X.m11 - p.lambda * hc.y.x;
    hc.y.y = (-X.m12 - X.m21) / d;
    hc.x.y = X.m21 - p.lambda * hc.y.y;
    return hc;
}

inline Mat2 from_hull_coordinates(const HullCoords& hc, const TwoWellParams& p) {
    return conformal(hc.x) + conformal(hc.y) * p.H();
}

/// det(C(x) + C(y)H) in hull coordinates; on K^c the condition "= 1" carves
/// out Z_min.
inline double hull_constraint(const HullCoords& hc, const TwoWellParams& p) {
    return norm2(hc.x) + norm2(hc.y) + (p.lambda + p.mu) * dot(hc.x, hc.y);
}

namespace detail {
inline void require_unimodular(const Mat2& q, const char* who) {
    if (std::abs(det(q) - 1.0) > 1e-10)
        throw numeric_error(std::string(who) + ": matrix is not unimodular");
}
}  // namespace detail

/// Angles of rank-one connection between the cosets SO(2)Q1 and SO(2)Q2.
///
/// With G = Q2 Q1^{-1} = C(c) + A(d) and det G = |c|^2 - |d|^2 = 1,
///   det(R_t Q1 - Q2) = det(R_t - G) = 2 - 2 <c, (cos t, sin t)>,
/// so connections solve <c, e(t)> = 1. |c| > 1 gives exactly two angles;
/// |c| = 1 means d = 0 and R_t Q1 = Q2 (conformally equivalent cosets),
/// reported as a single degenerate solution.
struct ConnectionAngles {
    std::vector<double> angles;
    bool degenerate = false;
};

inline ConnectionAngles rank_one_angles(const Mat2& q1, const Mat2& q2) {
    detail::require_unimodular(q1, "rank_one_angles");
    detail::require_unimodular(q2, "rank_one_angles");
    const ConformalCoords g = conformal_split(q2 * inverse(q1));
    const double phi = std::atan2(g.x.y, g.x.x);
    if (norm(g.y) <= 1e-10) return {{phi}, true};
    const double r = norm(g.x);
    const double delta = std::acos(std::min(1.0, 1.0 / r));
    return {{phi + delta, phi - delta}, false};
}

/// True iff Q2 = R Q1 for some rotation R, i.e. the anticonformal part of
/// Q2 Q1^{-1} vanishes.
inline bool conformally_equivalent(const Mat2& q1, const Mat2& q2) {
    detail::require_unimodular(q1, "conformally_equivalent");
    detail::require_unimodular(q2, "conformally_equivalent");
    return norm(conformal_split(q2 * inverse(q1)).y) <= 1e-10;
}

/// Membership flags for K = SO(2) u SO(2)H, the convex hull K^c and the
/// minimizing set Z_min = K^c n SL(2). The chain in_K => in_Zmin => in_Kc
/// is enforced.
struct Membership {
    bool in_K = false;
    bool in_Kc = false;
    bool in_Zmin = false;
};

inline Membership membership(const Mat2& X, const TwoWellParams& p, double tol = 1e-9) {
    const HullCoords hc = hull_coordinates(X, p);
    const double s = norm(hc.x) + norm(hc.y);
    Membership m;
    m.in_Kc = s <= 1.0 + tol;
    m.in_Zmin = m.in_Kc && std::abs(hull_constraint(hc, p) - 1.0) <= tol;
    const double d2 = std::min(dist2_to_coset(X, Mat2::identity()), dist2_to_coset(X, p.H()));
    m.in_K = d2 <= tol * tol;
    if (m.in_K) m.in_Zmin = true;
    if (m.in_Zmin) m.in_Kc = true;
    return m;
}

/// The exactly-two matrices of the opposite well rank-one connected to
/// X in K. For X = R_a: { R_{a+t*} H, R_{a-t*} H }; wells swap for X in
/// SO(2)H.
inline std::pair<Mat2, Mat2> neighbors_in_K(const Mat2& X, const TwoWellParams& p,
                                            double tol = 1e-10) {
    const double d2_id = dist2_to_coset(X, Mat2::identity());
    const double d2_h = dist2_to_coset(X, p.H());
    const double ts = p.connection_angle();
    if (d2_id <= tol * tol) {
        const Vec2 x = conformal_split(X).x;
        const double a = std::atan2(x.y, x.x);
        return {Mat2::rotation(a + ts) * p.H(), Mat2::rotation(a - ts) * p.H()};
    }
    if (d2_h <= tol * tol) {
        const Vec2 x = conformal_split(X * inverse(p.H())).x;
        const double a = std::atan2(x.y, x.x);
        return {Mat2::rotation(a + ts), Mat2::rotation(a - ts)};
    }
    throw numeric_error("neighbors_in_K: matrix is not in K");
}

/// Point of Z_min from spherical-style parameters: x = t e(alpha),
/// y = r e(gamma) with r >= 0 the root of
///   r^2 + (lambda+mu) t cos(gamma-alpha) r + t^2 - 1 = 0,
/// i.e. the det = 1 constraint. Rejects if |x|+|y| leaves the hull.
inline Mat2 sample_Zmin(double alpha, double gamma, double t, const TwoWellParams& p) {
    if (!(t >= 0.0 && t <= 1.0)) throw config_error("sample_Zmin: t must lie in [0, 1]");
    const double b = (p.lambda + p.mu) * t * std::cos(gamma - alpha);
    const double c = t * t - 1.0;
    const double disc = b * b - 4.0 * c;
    if (disc < 0.0) throw numeric_error("not in hull: no nonnegative root");
    const double r = 0.5 * (-b + std::sqrt(disc));
    if (r < 0.0) throw numeric_error("not in hull: no nonnegative root");
    if (t + r > 1.0 + 1e-12) throw numeric_error("not in hull: |x| + |y| exceeds 1");
    HullCoords hc;
    hc.x = {t * std::cos(alpha), t * std::sin(alpha)};
    hc.y = {r * std::cos(gamma), r * std::sin(gamma)};
    return from_hull_coordinates(hc, p);
}

}  // namespace twowell
