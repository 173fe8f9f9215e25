#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "twowell/laminate_tree.hpp"
#include "twowell/mat.hpp"
#include "twowell/rng.hpp"
#include "twowell/wells.hpp"

using namespace twowell;

namespace {

/// Root oracle: sample det(R_t Q1 - Q2) on a fine grid and bisect each sign
/// change; independent of the closed form under test.
std::vector<double> connection_angles_brute(const Mat2& q1, const Mat2& q2, int grid = 400000) {
    auto g = [&](double t) { return det(Mat2::rotation(t) * q1 - q2); };
    std::vector<double> roots;
    double prev = g(-M_PI);
    for (int k = 1; k <= grid; ++k) {
        const double t = -M_PI + 2.0 * M_PI * k / grid;
        const double cur = g(t);
        if ((prev < 0.0) != (cur < 0.0)) {
            double lo = t - 2.0 * M_PI / grid, hi = t;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((g(lo) < 0.0) != (g(mid) < 0.0))
                    hi = mid;
                else
                    lo = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        prev = cur;
    }
    return roots;
}

Mat2 random_unimodular(Rng& rng) {
    const Vec2 y = rng.vec2(-1.5, 1.5);
    const Vec2 dir = rng.unit_vec2();
    return conformal(std::sqrt(1.0 + norm2(y)) * dir) + anticonformal(y);
}

Mat2 random_in_K(Rng& rng, const TwoWellParams& p) {
    const Mat2 r = Mat2::rotation(rng.angle());
    return rng.uniform() < 0.5 ? r : r * p.H();
}

/// Uniform rejection sample of Z_min points through the (alpha, gamma, t)
/// parametrization.
Mat2 random_in_Zmin(Rng& rng, const TwoWellParams& p) {
    for (;;) {
        try {
            return sample_Zmin(rng.angle(), rng.angle(), rng.uniform(), p);
        } catch (const numeric_error&) {
        }
    }
}

}  // namespace

TEST_CASE("connection angles of the canonical pair (I, H)") {
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);
    const ConnectionAngles ca = rank_one_angles(Mat2::identity(), p.H());
    REQUIRE_FALSE(ca.degenerate);
    REQUIRE(ca.angles.size() == 2);
    const double expect = std::acos(0.8);
    REQUIRE(ca.angles[0] == Catch::Approx(expect).margin(1e-12));
    REQUIRE(ca.angles[1] == Catch::Approx(-expect).margin(1e-12));

    const auto brute = connection_angles_brute(Mat2::identity(), p.H());
    REQUIRE(brute.size() == 2);
    for (double th : ca.angles) {
        double best = 1e9;
        for (double r : brute) best = std::min(best, std::abs(r - th));
        REQUIRE(best <= 1e-9);
    }
}

TEST_CASE("degenerate connections are flagged, not filtered") {
    const auto same = rank_one_angles(Mat2::identity(), Mat2::identity());
    REQUIRE(same.degenerate);
    REQUIRE(same.angles.size() == 1);
    REQUIRE(std::abs(same.angles[0]) <= 1e-12);

    const double phi = 1.234;
    const auto rot = rank_one_angles(Mat2::identity(), Mat2::rotation(phi));
    REQUIRE(rot.degenerate);
    REQUIRE(rot.angles.size() == 1);
    REQUIRE(rot.angles[0] == Catch::Approx(phi).margin(1e-12));

    REQUIRE_THROWS_AS(rank_one_angles(Mat2::identity(), Mat2::diag(2.0, 1.0)), numeric_error);
}

TEST_CASE("random coset pairs connect at exactly two angles") {
    Rng rng(424242);
    int checked = 0;
    while (checked < 100) {
        const Mat2 q1 = random_unimodular(rng);
        const Mat2 q2 = random_unimodular(rng);
        const ConformalCoords g = conformal_split(q2 * inverse(q1));
        // det identity |c|^2 - |d|^2 = 1 for unimodular pairs
        REQUIRE(norm2(g.x) - norm2(g.y) == Catch::Approx(1.0).margin(1e-10));
        if (conformally_equivalent(q1, q2)) continue;
        REQUIRE(norm(g.x) > 1.0);
        const auto ca = rank_one_angles(q1, q2);
        REQUIRE_FALSE(ca.degenerate);
        REQUIRE(ca.angles.size() == 2);
        for (double th : ca.angles)
            REQUIRE(std::abs(det(Mat2::rotation(th) * q1 - q2)) <= 1e-10);
        ++checked;
    }
}

TEST_CASE("conformal equivalence of cosets") {
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);
    REQUIRE(conformally_equivalent(Mat2::identity(), Mat2::rotation(1.0)));
    REQUIRE_FALSE(conformally_equivalent(Mat2::identity(), p.H()));
    REQUIRE(conformally_equivalent(p.H(), Mat2::rotation(0.7) * p.H()));
}

TEST_CASE("exactly two neighbors in the opposite well") {
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);
    const double ts = p.connection_angle();
    REQUIRE(ts == Catch::Approx(std::acos(0.8)).margin(1e-15));

    const auto [n1, n2] = neighbors_in_K(Mat2::identity(), p);
    REQUIRE(frobenius(n1 - Mat2::rotation(ts) * p.H()) <= 1e-12);
    REQUIRE(frobenius(n2 - Mat2::rotation(-ts) * p.H()) <= 1e-12);

    const auto [h1, h2] = neighbors_in_K(p.H(), p);
    REQUIRE(frobenius(h1 - Mat2::rotation(ts)) <= 1e-12);
    REQUIRE(frobenius(h2 - Mat2::rotation(-ts)) <= 1e-12);

    REQUIRE_THROWS_AS(neighbors_in_K(2.0 * Mat2::identity(), p), numeric_error);

    Rng rng(90210);
    for (int s = 0; s < 100; ++s) {
        const Mat2 x = random_in_K(rng, p);
        const auto [a, b] = neighbors_in_K(x, p);
        REQUIRE(frobenius(a - b) > 1e-6);  // genuinely two partners
        const bool x_in_id = dist2_to_coset(x, Mat2::identity()) < 1e-16;
        for (const Mat2& nb : {a, b}) {
            // opposite well, and the difference is rank one
            const Mat2 opposite_coset = x_in_id ? p.H() : Mat2::identity();
            REQUIRE(dist2_to_coset(nb, opposite_coset) <= 1e-20);
            REQUIRE(std::abs(det(nb - x)) <= 1e-10);
        }
        // and only two: the cosets themselves connect at exactly two angles
        const auto ca = rank_one_angles(x, x_in_id ? p.H() : Mat2::identity());
        REQUIRE(ca.angles.size() == 2);
    }
}

TEST_CASE("hull coordinates solve and reconstruct") {
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);

    const HullCoords at_h = hull_coordinates(p.H(), p);
    REQUIRE(norm(at_h.x) <= 1e-15);
    REQUIRE(at_h.y.x == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(std::abs(at_h.y.y) <= 1e-15);

    const HullCoords at_id = hull_coordinates(Mat2::identity(), p);
    REQUIRE(at_id.x.x == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(norm(at_id.y) <= 1e-15);

    const Mat2 mid{0.7, -0.6, 0.15, 1.3};
    const HullCoords hm = hull_coordinates(mid, p);
    REQUIRE(hm.x.x == Catch::Approx(0.5).margin(1e-14));
    REQUIRE(std::abs(hm.x.y) <= 1e-14);
    REQUIRE(hm.y.x == Catch::Approx(0.4).margin(1e-14));
    REQUIRE(hm.y.y == Catch::Approx(0.3).margin(1e-14));
    REQUIRE(norm(hm.x) + norm(hm.y) == Catch::Approx(1.0).margin(1e-13));
    REQUIRE(hull_constraint(hm, p) == Catch::Approx(1.0).margin(1e-13));

    Rng rng(314159);
    for (int s = 0; s < 1000; ++s) {
        const Mat2 m = rng.mat2(-3.0, 3.0);
        const Mat2 back = from_hull_coordinates(hull_coordinates(m, p), p);
        REQUIRE(frobenius(back - m) <= 1e-12);
    }
}

TEST_CASE("hull determinant identity on random hull coordinates") {
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);
    Rng rng(8888);
    for (int s = 0; s < 10000; ++s) {
        HullCoords hc;
        const double split = rng.uniform();
        hc.x = split * rng.uniform() * rng.unit_vec2();
        hc.y = (1.0 - split) * rng.uniform() * rng.unit_vec2();
        REQUIRE(norm(hc.x) + norm(hc.y) <= 1.0 + 1e-12);
        const double d = det(from_hull_coordinates(hc, p));
        REQUIRE(d == Catch::Approx(hull_constraint(hc, p)).margin(1e-12));
    }
}

TEST_CASE("membership flags and the implication chain") {
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);

    const Mat2 mid{0.7, -0.6, 0.15, 1.3};
    const Membership mm = membership(mid, p);
    REQUIRE(mm.in_Zmin);
    REQUIRE(mm.in_Kc);
    REQUIRE_FALSE(mm.in_K);
    const double d2 = std::min(dist2_to_coset(mid, Mat2::identity()), dist2_to_coset(mid, p.H()));
    REQUIRE(d2 == Catch::Approx(0.2904981276).margin(1e-9));

    REQUIRE(membership(Mat2::identity(), p).in_K);
    const Membership m2 = membership(2.0 * Mat2::identity(), p);
    REQUIRE_FALSE(m2.in_K);
    REQUIRE_FALSE(m2.in_Kc);
    REQUIRE_FALSE(m2.in_Zmin);

    Rng rng(1618);
    for (int s = 0; s < 10000; ++s) {
        Mat2 m;
        const double kind = rng.uniform();
        if (kind < 0.3)
            m = rng.mat2(-2.0, 2.0);
        else if (kind < 0.6)
            m = random_in_K(rng, p);
        else
            m = random_in_Zmin(rng, p);
        const Membership mem = membership(m, p);
        if (mem.in_K) REQUIRE(mem.in_Zmin);
        if (mem.in_Zmin) REQUIRE(mem.in_Kc);
    }
}

TEST_CASE("Z_min sampler hits wells at the parameter extremes") {
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);

    const Mat2 at_t0 = sample_Zmin(0.3, 0.9, 0.0, p);
    REQUIRE(dist2_to_coset(at_t0, p.H()) <= 1e-20);

    const Mat2 at_t1 = sample_Zmin(0.4, 0.4, 1.0, p);
    REQUIRE(dist2_to_coset(at_t1, Mat2::identity()) <= 1e-20);

    const Mat2 mid = sample_Zmin(0.0, 0.6435011087932844, 0.5, p);
    REQUIRE(frobenius(mid - Mat2{0.7, -0.6, 0.15, 1.3}) <= 1e-9);

    // t = 1 with gamma opposite alpha forces |x| + |y| > 1
    REQUIRE_THROWS_WITH(sample_Zmin(0.0, M_PI, 1.0, p),
                        Catch::Matchers::ContainsSubstring("not in hull"));
    REQUIRE_THROWS_AS(sample_Zmin(0.0, 0.0, 1.5, p), config_error);
}

TEST_CASE("laminate decomposition: leaf, segment, interior") {
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);

    const LaminateTree leaf = laminate_decompose(Mat2::identity(), p);
    REQUIRE(leaf.leaf);
    REQUIRE(leaf.depth() == 0);
    REQUIRE(leaf.well == 0);

    const Mat2 mid{0.7, -0.6, 0.15, 1.3};
    const LaminateTree seg = laminate_decompose(mid, p);
    REQUIRE(seg.depth() == 1);
    REQUIRE(seg.zeta == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(frobenius(seg.plus->matrix - Mat2::identity()) <= 1e-12);
    REQUIRE(frobenius(seg.minus->matrix -
                      Mat2::rotation(p.connection_angle()) * p.H()) <= 1e-12);
    // interface normal is parallel to (1, 2)
    const Vec2 n = seg.n;
    REQUIRE(std::abs(n.x * 2.0 - n.y * 1.0) <= 1e-12);
    REQUIRE(frobenius(outer(seg.a, seg.n) - (seg.plus->matrix - seg.minus->matrix)) <= 1e-12);
    REQUIRE(frobenius(seg.leaf_average() - mid) <= 1e-10);

    const Mat2 interior = sample_Zmin(0.0, 0.0, 0.6, p);
    const HullCoords hc = hull_coordinates(interior, p);
    REQUIRE(norm(hc.x) + norm(hc.y) == Catch::Approx(0.9465878260).margin(1e-6));
    const LaminateTree t2 = laminate_decompose(interior, p);
    REQUIRE(t2.depth() == 2);
    REQUIRE(frobenius(t2.leaf_average() - interior) <= 1e-8);

    REQUIRE_THROWS_AS(laminate_decompose(2.0 * Mat2::identity(), p), numeric_error);
}

namespace {

void check_tree_invariants(const LaminateTree& t, const TwoWellParams& p) {
    if (t.leaf) {
        const Mat2 q = t.well == 0 ? Mat2::identity() : p.H();
        REQUIRE(dist2_to_coset(t.matrix, q) <= 1e-20);
        return;
    }
    REQUIRE(t.zeta > 0.0);
    REQUIRE(t.zeta < 1.0);
    const Mat2 d = t.plus->matrix - t.minus->matrix;
    REQUIRE(frobenius(outer(t.a, t.n) - d) <= 1e-9);
    // second singular value of the jump must vanish (rank one)
    const double sigma2 = std::abs(det(d)) / std::max(1e-12, frobenius(d));
    REQUIRE(sigma2 <= 1e-8);
    const Mat2 avg = t.zeta * t.plus->matrix + (1.0 - t.zeta) * t.minus->matrix;
    REQUIRE(frobenius(avg - t.matrix) <= 1e-8);
    check_tree_invariants(*t.plus, p);
    check_tree_invariants(*t.minus, p);
}

}  // namespace

TEST_CASE("laminate decomposition round-trips 200 sampled Z_min points") {
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);
    Rng rng(112233);
    for (int s = 0; s < 200; ++s) {
        const Mat2 r = random_in_Zmin(rng, p);
        const LaminateTree t = laminate_decompose(r, p);
        REQUIRE(t.depth() <= 2);
        REQUIRE(frobenius(t.leaf_average() - r) <= 1e-8);
        check_tree_invariants(t, p);
    }
}

TEST_CASE("two-well parameter validation") {
    REQUIRE_THROWS_AS(TwoWellParams::from_lambda(1.0), config_error);
    REQUIRE_THROWS_AS(TwoWellParams::from_lambda(-0.5), config_error);
    const TwoWellParams p = TwoWellParams::from_lambda(0.25);
    REQUIRE(p.lambda * p.mu == 1.0);
}
