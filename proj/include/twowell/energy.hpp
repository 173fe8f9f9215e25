#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "twowell/error.hpp"
#include "twowell/mat.hpp"
#include "twowell/rng.hpp"
#include "twowell/wells.hpp"

namespace twowell {

/// A stored-energy density F on 2x2 matrices with an optional analytic
/// gradient; without one, gradients fall back to central differences.
struct EnergyModel {
    std::string name;
    std::function<double(const Mat2&)> eval;
    std::function<Mat2(const Mat2&)> grad_analytic;  // may be empty

    Mat2 grad(const Mat2& m) const {
        if (grad_analytic) return grad_analytic(m);
        return grad_fd(m);
    }

    Mat2 grad_fd(const Mat2& m, double h = 1e-6) const {
        Mat2 g;
        Mat2 e;
        double* entries[4] = {&e.m11, &e.m12, &e.m21, &e.m22};
        double* out[4] = {&g.m11, &g.m12, &g.m21, &g.m22};
        for (int k = 0; k < 4; ++k) {
            e = Mat2{};
            *entries[k] = h;
            *out[k] = (eval(m + e) - eval(m - e)) / (2.0 * h);
        }
        return g;
    }
};

/// Dirichlet energy F(X) = tr(X^T X)/2 = |X|^2/2, gradient X.
inline EnergyModel dirichlet_model() {
    EnergyModel m;
    m.name = "dirichlet";
    m.eval = [](const Mat2& x) { return 0.5 * frobenius2(x); };
    m.grad_analytic = [](const Mat2& x) { return x; };
    return m;
}

/// Squared distance to the two-well set K = SO(2) u SO(2)H.
/// Gradient 2(M - P) with P the projection onto the nearer coset; ties and
/// degenerate projections take the SO(2) branch deterministically.
inline EnergyModel two_well_model(const TwoWellParams& p) {
    const Mat2 h = p.H();
    EnergyModel m;
    m.name = "two_well";
    m.eval = [h](const Mat2& x) {
        return std::min(dist2_to_coset(x, Mat2::identity()), dist2_to_coset(x, h));
    };
    m.grad_analytic = [h](const Mat2& x) {
        const double d0 = dist2_to_coset(x, Mat2::identity());
        const double d1 = dist2_to_coset(x, h);
        const Mat2 q = d0 <= d1 ? Mat2::identity() : h;
        const Vec2 cx = conformal_split(x * transpose(q)).x;
        if (norm(cx) < 1e-12) return 2.0 * x;  // projection non-unique, |x|-term subgradient 0
        return 2.0 * (x - nearest_in_coset(x, q));
    };
    return m;
}

/// Numerical probes for the structural properties of an energy model.
struct ConvexityReport {
    double frame_indiff_max = 0.0;        // max |F(RX) - F(X)|
    double rank1_min_second_diff = 0.0;   // min second difference along rank-one lines
    double uniform_convexity_lower = 0.0; // min [F(X)-F(Y)-DF(Y):(X-Y)] / |X-Y|^2
    double quasiconvexity_ratio_min = 0.0;// min int(F(X+grad phi)-F(X)) / int |grad phi|^2
};

namespace detail {

/// Piecewise-affine test field on an n x n triangulated unit square with
/// zero boundary values; returns the quasiconvexity ratio for base point X.
inline double quasiconvexity_ratio(const EnergyModel& model, const Mat2& X, Rng& rng, int n = 8,
                                   double amplitude = 0.04) {
    const int nv = n + 1;
    std::vector<Vec2> phi(static_cast<std::size_t>(nv) * nv, Vec2{});
    for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i)
            phi[static_cast<std::size_t>(j) * nv + i] = rng.vec2(-amplitude, amplitude);

    const double hx = 1.0 / n;
    double excess = 0.0, dirichlet = 0.0;
    const double fX = model.eval(X);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 v00 = phi[static_cast<std::size_t>(j) * nv + i];
            const Vec2 v10 = phi[static_cast<std::size_t>(j) * nv + i + 1];
            const Vec2 v01 = phi[static_cast<std::size_t>(j + 1) * nv + i];
            const Vec2 v11 = phi[static_cast<std::size_t>(j + 1) * nv + i + 1];
            // lower triangle (00, 10, 01), upper triangle (10, 11, 01); axis-aligned
            // legs make the affine gradients explicit
            const Mat2 g_lo{(v10.x - v00.x) / hx, (v01.x - v00.x) / hx,
                            (v10.y - v00.y) / hx, (v01.y - v00.y) / hx};
            const Mat2 g_up{(v11.x - v01.x) / hx, (v11.x - v10.x) / hx,
                            (v11.y - v01.y) / hx, (v11.y - v10.y) / hx};
            const double area = 0.5 * hx * hx;
            for (const Mat2& g : {g_lo, g_up}) {
                excess += area * (model.eval(X + g) - fX);
                dirichlet += area * frobenius2(g);
            }
        }
    if (dirichlet < 1e-30) return 0.0;
    return excess / dirichlet;
}

}  // namespace detail

/// Sampled probes of frame indifference, rank-one convexity, uniform
/// convexity and the uniform-quasiconvexity ratio. All estimates are
/// seeded lower/upper envelopes over random samples, not certificates.
/// The canonical two-well rank-one segment [I, R_{theta*} H] (lambda = 1/2)
/// is always included among the probed lines.
inline ConvexityReport convexity_probes(const EnergyModel& model, int samples, std::uint64_t seed) {
    if (samples < 1) throw config_error("convexity_probes: samples must be >= 1");
    Rng rng(seed);
    ConvexityReport rep;
    rep.rank1_min_second_diff = std::numeric_limits<double>::infinity();
    rep.uniform_convexity_lower = std::numeric_limits<double>::infinity();
    rep.quasiconvexity_ratio_min = std::numeric_limits<double>::infinity();

    auto second_diffs_along = [&](const Mat2& base, const Mat2& dir) {
        const int nt = 9;
        const double h = 2.0 / (nt - 1);
        std::vector<double> f(nt);
        for (int k = 0; k < nt; ++k) f[k] = model.eval(base + (-1.0 + k * h) * dir);
        for (int k = 1; k + 1 < nt; ++k)
            rep.rank1_min_second_diff = std::min(rep.rank1_min_second_diff,
                                                 f[k + 1] - 2.0 * f[k] + f[k - 1]);
    };

    for (int s = 0; s < samples; ++s) {
        const Mat2 X = rng.mat2(-2.0, 2.0);
        const Mat2 R = Mat2::rotation(rng.angle());
        rep.frame_indiff_max =
            std::max(rep.frame_indiff_max, std::abs(model.eval(R * X) - model.eval(X)));

        second_diffs_along(X, outer(rng.unit_vec2(), rng.unit_vec2()));

        const Mat2 Y = rng.mat2(-2.0, 2.0);
        const Mat2 diff = X - Y;
        const double dd = frobenius2(diff);
        if (dd > 1e-12) {
            const double excess = model.eval(X) - model.eval(Y) - inner(model.grad(Y), diff);
            rep.uniform_convexity_lower = std::min(rep.uniform_convexity_lower, excess / dd);
        }

        rep.quasiconvexity_ratio_min = std::min(
            rep.quasiconvexity_ratio_min, detail::quasiconvexity_ratio(model, X, rng));
    }

    // canonical two-well segment: midpoint of [I, R_{t*}H] at lambda = 1/2
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);
    const Mat2 B = Mat2::rotation(p.connection_angle()) * p.H();
    const Mat2 mid = 0.5 * (Mat2::identity() + B);
    second_diffs_along(mid, 0.5 * (B - Mat2::identity()));
    return rep;
}

}  // namespace twowell
