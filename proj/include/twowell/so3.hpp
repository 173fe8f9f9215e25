#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "twowell/error.hpp"
#include "twowell/mat.hpp"
#include "twowell/parallel.hpp"

namespace twowell {

/// Result of scanning g(R) = det(R - Q) over SO(3).
struct So3ScanResult {
    double min_abs_residual = 0.0;
    Mat3 argmin = Mat3::identity();
    long samples_evaluated = 0;
};

namespace detail {

/// Deterministic quasi-uniform axis-angle grid: Fibonacci-spiral axes on
/// the sphere crossed with uniform angles in (0, pi], plus the identity.
/// n-th axis uses the golden angle increment, so the grid is reproducible
/// at any size.
struct AxisAngleGrid {
    int n_axes;
    int n_angles;

    static AxisAngleGrid for_samples(int n_samples) {
        // 3-parameter group: angles ~ n^(1/3), axes ~ n^(2/3)
        const int na = std::max(8, static_cast<int>(std::cbrt(static_cast<double>(n_samples))));
        const int nx = std::max(16, n_samples / na);
        return {nx, na};
    }

    long size() const { return static_cast<long>(n_axes) * n_angles + 1; }

    Mat3 rotation(long idx) const {
        if (idx == 0) return Mat3::identity();
        idx -= 1;
        const long ax = idx / n_angles;
        const long ai = idx % n_angles;
        const double golden = 2.0 - 1.6180339887498949;  // 2 - phi
        const double z = 1.0 - 2.0 * (ax + 0.5) / n_axes;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double az = 2.0 * M_PI * golden * ax;
        const Vec2 xy{rho * std::cos(az), rho * std::sin(az)};
        const double angle = M_PI * (ai + 1.0) / n_angles;
        return Mat3::axis_angle(xy, z, angle);
    }
};

inline double so3_objective(const Mat3& r, const Mat3& q) { return std::abs(det(r - q)); }

/// Gradient-free pattern search in the left-translated axis-angle chart
/// R(w) = exp([w]x) R0. The objective is a smooth cubic in w, so the
/// search contracts cleanly.
inline void pattern_refine(const Mat3& q, Mat3& r, double& best, double step, int iters) {
    for (int it = 0; it < iters; ++it) {
        bool improved = false;
        for (int axis = 0; axis < 3; ++axis) {
            for (double sgn : {1.0, -1.0}) {
                Vec2 xy{0.0, 0.0};
                double z = 0.0;
                if (axis == 0) xy.x = 1.0;
                if (axis == 1) xy.y = 1.0;
                if (axis == 2) z = 1.0;
                const Mat3 cand = Mat3::axis_angle(xy, z, sgn * step) * r;
                const double v = so3_objective(cand, q);
                if (v < best) {
                    best = v;
                    r = cand;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
        if (step < 1e-14) break;
    }
}

}  // namespace detail

/// Global scan of |det(R - Q)| over SO(3): dense deterministic sampling,
/// then local pattern-search refinement of the best grid candidates.
/// A strictly positive minimum is numerical evidence that SO(3) and
/// SO(3)Q are nowhere rank-one connected; zero residual exhibits a
/// connection.
inline So3ScanResult so3_rank_one_scan(const Mat3& q, int n_samples = 100000,
                                       int refine_iters = 60) {
    if (std::abs(det(q) - 1.0) > 1e-8)
        throw numeric_error("so3_rank_one_scan: matrix is not unimodular");
    if (n_samples < 1) throw config_error("so3_rank_one_scan: n_samples must be positive");

    const detail::AxisAngleGrid grid = detail::AxisAngleGrid::for_samples(n_samples);
    const long total = grid.size();

    struct Best {
        double value;
        long index;
    };
    const int workers = worker_count();
    std::vector<std::vector<Best>> tops(static_cast<std::size_t>(std::max(workers, 1)) + 1);

    constexpr int keep = 16;
    parallel_for_blocks(static_cast<std::size_t>(total), [&](std::size_t lo, std::size_t hi, int w) {
        auto& top = tops[w];
        for (std::size_t i = lo; i < hi; ++i) {
            const double v = detail::so3_objective(grid.rotation(static_cast<long>(i)), q);
            if (top.size() < keep) {
                top.push_back({v, static_cast<long>(i)});
                std::push_heap(top.begin(), top.end(),
                               [](const Best& a, const Best& b) { return a.value < b.value; });
            } else if (v < top.front().value) {
                std::pop_heap(top.begin(), top.end(),
                              [](const Best& a, const Best& b) { return a.value < b.value; });
                top.back() = {v, static_cast<long>(i)};
                std::push_heap(top.begin(), top.end(),
                               [](const Best& a, const Best& b) { return a.value < b.value; });
            }
        }
    });

    std::vector<Best> candidates;
    for (const auto& t : tops) candidates.insert(candidates.end(), t.begin(), t.end());
    std::sort(candidates.begin(), candidates.end(), [](const Best& a, const Best& b) {
        return a.value != b.value ? a.value < b.value : a.index < b.index;
    });
    if (candidates.size() > keep) candidates.resize(keep);

    So3ScanResult result;
    result.samples_evaluated = total;
    result.min_abs_residual = std::numeric_limits<double>::infinity();
    const double base_step = M_PI / grid.n_angles;
    for (const Best& c : candidates) {
        Mat3 r = grid.rotation(c.index);
        double v = c.value;
        detail::pattern_refine(q, r, v, base_step, refine_iters);
        if (v < result.min_abs_residual) {
            result.min_abs_residual = v;
            result.argmin = r;
        }
    }
    return result;
}

}  // namespace twowell
