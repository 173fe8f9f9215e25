#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "twowell/energy.hpp"
#include "twowell/error.hpp"
#include "twowell/field.hpp"
#include "twowell/mat.hpp"

namespace twowell {

/// Discrete incompressible minimization: the det = 1 constraint of the
/// area-preserving class enters as a quadratic penalty
///   E_beta[u] = sum_T area F(grad u_T) + beta sum_T area (det grad u_T - 1)^2
/// with beta continuation across stages; the residual max |det - 1| is
/// reported, never hidden.
struct MinimizeProblem {
    DeformationField initial;
    EnergyModel model;
    double beta0 = 10.0;
    double beta_factor = 10.0;
    int beta_stages = 3;
    int max_iterations = 5000;  // per stage
    double descent_tol = 1e-7;  // sup-norm of the projected gradient
};

struct TraceRow {
    long iter;
    double energy;            // F term only
    double penalty_residual;  // max |det grad u - 1|
    double step;
};

struct SolveReport {
    double final_energy = 0.0;      // without the penalty term
    double penalty_residual = 0.0;  // max |det grad u - 1|
    long iterations = 0;
    bool monotone = true;
    bool failed = false;
    std::string failure;
    std::vector<TraceRow> trace;
};

namespace detail {

struct AssembleOut {
    double total = 0.0;     // F + penalty
    double f_part = 0.0;    // F alone
    double pen_max = 0.0;   // max |det - 1|
};

/// Per-triangle exact differentiation of both energy terms with respect to
/// vertex positions. With Ds = [q1-q0 | q2-q0], G = Ds Bm and
/// W = area (DF(G) + 2 beta (det G - 1) cof G) Bm^T, the forces are the
/// columns of W on q1, q2 and minus their sum on q0.
inline AssembleOut assemble(const DeformationField& f, const EnergyModel& model, double beta,
                            std::vector<Vec2>* grad_out) {
    const double area = f.triangle_area();
    if (grad_out) grad_out->assign(static_cast<std::size_t>(f.n_vertices()), Vec2{});
    AssembleOut out;
    for (int t = 0; t < f.n_triangles(); ++t) {
        const auto tri = f.triangle(t);
        const Vec2 p0 = f.ref(tri[0][0], tri[0][1]);
        const Vec2 p1 = f.ref(tri[1][0], tri[1][1]);
        const Vec2 p2 = f.ref(tri[2][0], tri[2][1]);
        const std::size_t v0 = f.vid(tri[0][0], tri[0][1]);
        const std::size_t v1 = f.vid(tri[1][0], tri[1][1]);
        const std::size_t v2 = f.vid(tri[2][0], tri[2][1]);
        const Vec2 q0 = f.deformed[v0], q1 = f.deformed[v1], q2 = f.deformed[v2];
        const Mat2 dm{p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y};
        const Mat2 bm = inverse(dm);
        const Mat2 g = Mat2{q1.x - q0.x, q2.x - q0.x, q1.y - q0.y, q2.y - q0.y} * bm;

        const double fv = model.eval(g);
        const double r = det(g) - 1.0;
        out.f_part += area * fv;
        out.total += area * (fv + beta * r * r);
        out.pen_max = std::max(out.pen_max, std::abs(r));

        if (grad_out) {
            const Mat2 w = area * ((model.grad(g) + (2.0 * beta * r) * cof(g)) * transpose(bm));
            auto& gr = *grad_out;
            gr[v1].x += w.m11;
            gr[v1].y += w.m21;
            gr[v2].x += w.m12;
            gr[v2].y += w.m22;
            gr[v0].x -= w.m11 + w.m12;
            gr[v0].y -= w.m21 + w.m22;
        }
    }
    if (grad_out && f.pinned) {
        for (int j = 0; j <= f.ny; ++j)
            for (int i = 0; i <= f.nx; ++i)
                if (i == 0 || i == f.nx || j == 0 || j == f.ny)
                    (*grad_out)[f.vid(i, j)] = Vec2{};
    }
    return out;
}

}  // namespace detail

/// Energy and per-vertex gradient of E_beta; boundary-vertex components are
/// zeroed when the field carries Dirichlet data.
inline std::pair<double, std::vector<Vec2>> assemble_energy_and_grad(const DeformationField& f,
                                                                     const EnergyModel& model,
                                                                     double beta) {
    std::vector<Vec2> grad;
    const auto out = detail::assemble(f, model, beta, &grad);
    return {out.total, std::move(grad)};
}

/// Projected gradient descent with Armijo backtracking (monotone per
/// stage) and beta continuation across stages.
inline std::pair<DeformationField, SolveReport> minimize(const MinimizeProblem& problem) {
    DeformationField field = problem.initial;
    SolveReport report;
    if (problem.beta0 <= 0.0 || problem.beta_factor <= 1.0 || problem.beta_stages < 1)
        throw config_error("minimize: need beta0 > 0, factor > 1, stages >= 1");

    const double armijo_c = 1e-4;
    double beta = problem.beta0;
    std::vector<Vec2> grad, trial;
    long iter_count = 0;

    {
        const auto a0 = detail::assemble(field, problem.model, beta, nullptr);
        report.trace.push_back({0, a0.f_part, a0.pen_max, 0.0});
        if (!std::isfinite(a0.total)) {
            report.failed = true;
            report.failure = "non-finite energy at the initial iterate";
        }
    }

    double step = 1.0;
    for (int stage = 0; stage < problem.beta_stages && !report.failed; ++stage) {
        for (int it = 0; it < problem.max_iterations; ++it) {
            const auto cur = detail::assemble(field, problem.model, beta, &grad);
            double gnorm2 = 0.0, ginf = 0.0;
            for (const Vec2& g : grad) {
                gnorm2 += norm2(g);
                ginf = std::max(ginf, std::max(std::abs(g.x), std::abs(g.y)));
            }
            if (ginf <= problem.descent_tol) break;

            step = std::min(step * 2.0, 1e3);
            bool accepted = false;
            detail::AssembleOut next;
            trial.resize(field.deformed.size());
            while (step > 1e-18) {
                for (std::size_t v = 0; v < trial.size(); ++v)
                    trial[v] = field.deformed[v] - step * grad[v];
                std::swap(field.deformed, trial);
                next = detail::assemble(field, problem.model, beta, nullptr);
                if (std::isfinite(next.total) && next.total <= cur.total - armijo_c * step * gnorm2) {
                    accepted = true;
                    break;
                }
                std::swap(field.deformed, trial);  // reject
                step *= 0.5;
            }
            if (!accepted) break;  // no admissible step at this beta
            ++iter_count;
            if (next.total > cur.total) report.monotone = false;
            report.trace.push_back({iter_count, next.f_part, next.pen_max, step});
            if (!std::isfinite(next.total)) {
                report.failed = true;
                report.failure = "non-finite energy during descent";
                break;
            }
        }
        beta *= problem.beta_factor;
    }

    const auto fin = detail::assemble(field, problem.model, beta / problem.beta_factor, nullptr);
    report.final_energy = fin.f_part;
    report.penalty_residual = fin.pen_max;
    report.iterations = iter_count;
    return {std::move(field), std::move(report)};
}

/// Liouville-style certificate: all gradients in a single coset SO(2)P
/// plus a global affine fit. P is read off the first triangle (the coset
/// absorbs its polar rotation); each gradient is tested after
/// right-multiplying by P^{-1}.
struct AffineCertificate {
    bool certified = false;
    bool single_coset = false;
    Mat2 fitted_P = Mat2::identity();
    double coset_residual = 0.0;
    double affine_residual = 0.0;
    std::string reason;
};

inline AffineCertificate affine_certificate(const DeformationField& f, double coset_tol = 1e-6,
                                            double affine_tol = 1e-6) {
    AffineCertificate cert;
    if (f.n_triangles() == 0) {
        cert.reason = "empty field";
        return cert;
    }
    cert.fitted_P = f.gradient(0);
    if (std::abs(det(cert.fitted_P)) < 1e-12) {
        cert.reason = "first-triangle gradient is singular";
        return cert;
    }
    const Mat2 pinv = inverse(cert.fitted_P);

    long off = 0;
    Mat2 second = Mat2::identity();
    bool have_second = false;
    long second_hits = 0, stray = 0;
    for (int t = 0; t < f.n_triangles(); ++t) {
        const Mat2 gp = f.gradient(t) * pinv;
        const double d = std::sqrt(dist2_to_coset(gp, Mat2::identity()));
        cert.coset_residual = std::max(cert.coset_residual, d);
        if (d > coset_tol) {
            ++off;
            if (!have_second) {
                second = f.gradient(t);
                have_second = true;
                ++second_hits;
            } else if (std::abs(det(second)) > 1e-12 &&
                       std::sqrt(dist2_to_coset(f.gradient(t) * inverse(second),
                                                Mat2::identity())) <= coset_tol) {
                ++second_hits;
            } else {
                ++stray;
            }
        }
    }
    cert.single_coset = off == 0;
    if (!cert.single_coset) {
        if (stray == 0)
            cert.reason = "gradients populate 2 cosets";
        else
            cert.reason = "gradients leave every fitted coset";
    }

    // least-squares affine fit u ~ A p + c over all vertices
    double n00 = 0, n01 = 0, n02 = 0, n11 = 0, n12 = 0, n22 = 0;
    double rx[3] = {0, 0, 0}, ry[3] = {0, 0, 0};
    for (int j = 0; j <= f.ny; ++j)
        for (int i = 0; i <= f.nx; ++i) {
            const Vec2 p = f.ref(i, j);
            const Vec2 u = f.deformed[f.vid(i, j)];
            n00 += p.x * p.x;
            n01 += p.x * p.y;
            n02 += p.x;
            n11 += p.y * p.y;
            n12 += p.y;
            n22 += 1.0;
            rx[0] += p.x * u.x;
            rx[1] += p.y * u.x;
            rx[2] += u.x;
            ry[0] += p.x * u.y;
            ry[1] += p.y * u.y;
            ry[2] += u.y;
        }
    const Mat3 N{{n00, n01, n02, n01, n11, n12, n02, n12, n22}};
    const double dN = det(N);
    auto solve3 = [&](const double* r, double out[3]) {
        for (int c = 0; c < 3; ++c) {
            Mat3 t = N;
            for (int row = 0; row < 3; ++row) t(row, c) = r[row];
            out[c] = det(t) / dN;
        }
    };
    double ax[3], ay[3];
    solve3(rx, ax);
    solve3(ry, ay);
    const Mat2 A{ax[0], ax[1], ay[0], ay[1]};
    const Vec2 c{ax[2], ay[2]};
    for (int j = 0; j <= f.ny; ++j)
        for (int i = 0; i <= f.nx; ++i) {
            const Vec2 res = A * f.ref(i, j) + c - f.deformed[f.vid(i, j)];
            cert.affine_residual = std::max(cert.affine_residual, norm(res));
        }
    if (cert.single_coset && cert.affine_residual > affine_tol)
        cert.reason = "gradients share a coset but the map is not affine";
    cert.certified = cert.single_coset && cert.affine_residual <= affine_tol;
    return cert;
}

/// Discrete weak divergence of the cofactor field: the maximum over
/// interior hat functions phi of |sum_T area (cof grad u_T) : grad phi_T|.
/// Zero (to roundoff) for every continuous piecewise-affine map — the
/// Piola identity — and order-one for torn fields.
///
/// Soup-level variant: per-triangle corner positions may disagree across
/// shared vertices, which models tearing.
inline double null_lagrangian_residual_soup(const std::vector<Vec2>& ref,
                                            const std::vector<std::array<int, 3>>& tris,
                                            const std::vector<std::array<Vec2, 3>>& corners,
                                            const std::vector<std::uint8_t>& interior) {
    std::vector<Vec2> acc(ref.size(), Vec2{});
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const Vec2 p0 = ref[tris[t][0]], p1 = ref[tris[t][1]], p2 = ref[tris[t][2]];
        const Vec2 q0 = corners[t][0], q1 = corners[t][1], q2 = corners[t][2];
        const Mat2 dm{p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y};
        const double area = 0.5 * std::abs(det(dm));
        const Mat2 bm = inverse(dm);
        const Mat2 g = Mat2{q1.x - q0.x, q2.x - q0.x, q1.y - q0.y, q2.y - q0.y} * bm;
        const Mat2 c = cof(g);
        const Vec2 gl1{bm.m11, bm.m12}, gl2{bm.m21, bm.m22};
        const Vec2 gl0 = -(gl1 + gl2);
        const Vec2 gls[3] = {gl0, gl1, gl2};
        for (int k = 0; k < 3; ++k) {
            const int v = tris[t][k];
            if (!interior[v]) continue;
            acc[v].x += area * (c.m11 * gls[k].x + c.m12 * gls[k].y);
            acc[v].y += area * (c.m21 * gls[k].x + c.m22 * gls[k].y);
        }
    }
    double r = 0.0;
    for (const Vec2& a : acc) r = std::max(r, std::max(std::abs(a.x), std::abs(a.y)));
    return r;
}

inline double null_lagrangian_residual(const DeformationField& f) {
    std::vector<Vec2> ref(static_cast<std::size_t>(f.n_vertices()));
    std::vector<std::uint8_t> interior(ref.size(), 0);
    for (int j = 0; j <= f.ny; ++j)
        for (int i = 0; i <= f.nx; ++i) {
            ref[f.vid(i, j)] = f.ref(i, j);
            interior[f.vid(i, j)] = i != 0 && i != f.nx && j != 0 && j != f.ny;
        }
    std::vector<std::array<int, 3>> tris(static_cast<std::size_t>(f.n_triangles()));
    std::vector<std::array<Vec2, 3>> corners(tris.size());
    for (int t = 0; t < f.n_triangles(); ++t) {
        const auto tri = f.triangle(t);
        for (int k = 0; k < 3; ++k) {
            tris[t][k] = static_cast<int>(f.vid(tri[k][0], tri[k][1]));
            corners[t][k] = f.deformed[tris[t][k]];
        }
    }
    return null_lagrangian_residual_soup(ref, tris, corners, interior);
}

}  // namespace twowell
