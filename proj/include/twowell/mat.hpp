#pragma once

#include <array>
#include <cmath>

#include "twowell/error.hpp"

namespace twowell {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
constexpr Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
constexpr Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double norm2(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline double norm(Vec2 v) { return std::sqrt(norm2(v)); }

/// Rotation of v by +90 degrees.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

/// 2x2 real matrix, row-major entries. Carrier for deformation gradients,
/// wells and hull points.
struct Mat2 {
    double m11 = 0.0;
    double m12 = 0.0;
    double m21 = 0.0;
    double m22 = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 diag(double a, double d) { return {a, 0.0, 0.0, d}; }
    static Mat2 rotation(double theta) {
        const double c = std::cos(theta), s = std::sin(theta);
        return {c, -s, s, c};
    }
};

constexpr Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.m11 + b.m11, a.m12 + b.m12, a.m21 + b.m21, a.m22 + b.m22};
}
constexpr Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
}
constexpr Mat2 operator*(double s, const Mat2& a) {
    return {s * a.m11, s * a.m12, s * a.m21, s * a.m22};
}
constexpr Mat2 operator*(const Mat2& a, double s) { return s * a; }
constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
}
constexpr Vec2 operator*(const Mat2& a, Vec2 v) {
    return {a.m11 * v.x + a.m12 * v.y, a.m21 * v.x + a.m22 * v.y};
}

constexpr double det(const Mat2& a) { return a.m11 * a.m22 - a.m12 * a.m21; }
constexpr double trace(const Mat2& a) { return a.m11 + a.m22; }
constexpr Mat2 transpose(const Mat2& a) { return {a.m11, a.m21, a.m12, a.m22}; }

/// Cofactor matrix; cof(M) : N is the derivative of det at M.
/// For rotations cof(R) = R.
constexpr Mat2 cof(const Mat2& a) { return {a.m22, -a.m21, -a.m12, a.m11}; }

constexpr double frobenius2(const Mat2& a) {
    return a.m11 * a.m11 + a.m12 * a.m12 + a.m21 * a.m21 + a.m22 * a.m22;
}
inline double frobenius(const Mat2& a) { return std::sqrt(frobenius2(a)); }

/// Frobenius inner product tr(A^T B).
constexpr double inner(const Mat2& a, const Mat2& b) {
    return a.m11 * b.m11 + a.m12 * b.m12 + a.m21 * b.m21 + a.m22 * b.m22;
}

constexpr Mat2 outer(Vec2 a, Vec2 n) {
    return {a.x * n.x, a.x * n.y, a.y * n.x, a.y * n.y};
}

inline Mat2 inverse(const Mat2& a) {
    const double d = det(a);
    if (std::abs(d) < 1e-300) throw numeric_error("matrix is singular");
    return (1.0 / d) * Mat2{a.m22, -a.m12, -a.m21, a.m11};
}

/// Conformal + anticonformal coordinates of a 2x2 matrix,
/// M = C(x) + A(y) with C(x) = [[x1,-x2],[x2,x1]], A(y) = [[y1,y2],[y2,-y1]].
/// The two blocks are Frobenius-orthogonal and
///   det M = |x|^2 - |y|^2,   |M|_F^2 = 2(|x|^2 + |y|^2).
struct ConformalCoords {
    Vec2 x;  // conformal part (rotation-scaling)
    Vec2 y;  // anticonformal part (reflection-scaling)
};

constexpr Mat2 conformal(Vec2 x) { return {x.x, -x.y, x.y, x.x}; }
constexpr Mat2 anticonformal(Vec2 y) { return {y.x, y.y, y.y, -y.x}; }

constexpr ConformalCoords conformal_split(const Mat2& m) {
    return {{0.5 * (m.m11 + m.m22), 0.5 * (m.m21 - m.m12)},
            {0.5 * (m.m11 - m.m22), 0.5 * (m.m12 + m.m21)}};
}

constexpr Mat2 reconstruct(const ConformalCoords& c) {
    return conformal(c.x) + anticonformal(c.y);
}

/// Squared Frobenius distance from M to the coset SO(2)Q:
///   min_R |M - RQ|^2 = |M|^2 + |Q|^2 - 4|x|,  x = conformal part of M Q^T,
/// since <M, RQ> = <M Q^T, R> = 2 <x, (cos t, sin t)> peaks at 2|x|.
/// Evaluated as |M - R*Q|^2 when the minimizer R* exists; the subtraction
/// form stays accurate when M is close to the coset.
inline double dist2_to_coset(const Mat2& m, const Mat2& q) {
    if (std::abs(det(q)) < 1e-14) throw numeric_error("dist2_to_coset: coset matrix is singular");
    const Vec2 x = conformal_split(m * transpose(q)).x;
    const double r = norm(x);
    if (r > 1e-12) return frobenius2(m - conformal(x / r) * q);
    return frobenius2(m) + frobenius2(q) - 4.0 * r;
}

/// Nearest point R*Q of the coset SO(2)Q, R* = C(x/|x|).
/// Undefined (non-unique) when the conformal part of M Q^T vanishes.
inline Mat2 nearest_in_coset(const Mat2& m, const Mat2& q) {
    if (std::abs(det(q)) < 1e-14) throw numeric_error("nearest_in_coset: coset matrix is singular");
    const Vec2 x = conformal_split(m * transpose(q)).x;
    const double r = norm(x);
    if (r < 1e-12) throw numeric_error("projection undefined: conformal part vanishes, nearest point non-unique");
    return conformal(x / r) * q;
}

/// 3x3 real matrix, row-major.
struct Mat3 {
    std::array<double, 9> m{};

    double& operator()(int i, int j) { return m[3 * i + j]; }
    double operator()(int i, int j) const { return m[3 * i + j]; }

    static Mat3 identity() { return Mat3{{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
    static Mat3 diag(double a, double b, double c) { return Mat3{{a, 0, 0, 0, b, 0, 0, 0, c}}; }

    /// Rodrigues rotation about unit axis by angle.
    static Mat3 axis_angle(Vec2 axis_xy, double axis_z, double angle) {
        const double c = std::cos(angle), s = std::sin(angle);
        const double ux = axis_xy.x, uy = axis_xy.y, uz = axis_z;
        const double t = 1.0 - c;
        return Mat3{{c + ux * ux * t, ux * uy * t - uz * s, ux * uz * t + uy * s,
                     uy * ux * t + uz * s, c + uy * uy * t, uy * uz * t - ux * s,
                     uz * ux * t - uy * s, uz * uy * t + ux * s, c + uz * uz * t}};
    }
};

inline Mat3 operator-(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = a.m[i] - b.m[i];
    return r;
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}

inline Mat3 transpose(const Mat3& a) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
    return r;
}

/// Determinant by cofactor expansion along the first row.
inline double det(const Mat3& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

inline double frobenius2(const Mat3& a) {
    double s = 0.0;
    for (double v : a.m) s += v * v;
    return s;
}

}  // namespace twowell
