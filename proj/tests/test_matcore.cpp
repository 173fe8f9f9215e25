#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "twowell/mat.hpp"
#include "twowell/rng.hpp"

using namespace twowell;

namespace {

/// Independent oracle: brute-force minimum of |M - R_t Q|^2 over a dense
/// angle sweep.
double dist2_brute(const Mat2& m, const Mat2& q, int n_angles = 100000) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_angles; ++k) {
        const double t = -M_PI + 2.0 * M_PI * k / n_angles;
        best = std::min(best, frobenius2(m - Mat2::rotation(t) * q));
    }
    return best;
}

}  // namespace

TEST_CASE("conformal split of reference matrices") {
    const auto id = conformal_split(Mat2::identity());
    REQUIRE(id.x.x == 1.0);
    REQUIRE(id.x.y == 0.0);
    REQUIRE(id.y.x == 0.0);
    REQUIRE(id.y.y == 0.0);

    const auto d = conformal_split(Mat2::diag(0.5, 2.0));
    REQUIRE(d.x.x == Catch::Approx(1.25).margin(1e-15));
    REQUIRE(d.x.y == 0.0);
    REQUIRE(d.y.x == Catch::Approx(-0.75).margin(1e-15));
    REQUIRE(d.y.y == 0.0);
    REQUIRE(frobenius(reconstruct(d) - Mat2::diag(0.5, 2.0)) <= 1e-14);

    const double theta = 0.83;
    const auto r = conformal_split(Mat2::rotation(theta));
    REQUIRE(r.x.x == Catch::Approx(std::cos(theta)).margin(1e-15));
    REQUIRE(r.x.y == Catch::Approx(std::sin(theta)).margin(1e-15));
    REQUIRE(norm(r.y) <= 1e-15);
}

TEST_CASE("split round-trip and norm identities on random matrices") {
    Rng rng(20240901);
    for (int s = 0; s < 10000; ++s) {
        const Mat2 m = rng.mat2(-5.0, 5.0);
        const auto c = conformal_split(m);
        const Mat2 back = reconstruct(c);
        REQUIRE(std::abs(back.m11 - m.m11) <= 1e-14);
        REQUIRE(std::abs(back.m12 - m.m12) <= 1e-14);
        REQUIRE(std::abs(back.m21 - m.m21) <= 1e-14);
        REQUIRE(std::abs(back.m22 - m.m22) <= 1e-14);
        REQUIRE(det(m) == Catch::Approx(norm2(c.x) - norm2(c.y)).epsilon(1e-12).margin(1e-12));
        REQUIRE(frobenius2(m) ==
                Catch::Approx(2.0 * (norm2(c.x) + norm2(c.y))).epsilon(1e-12).margin(1e-12));
    }
}

TEST_CASE("coset distance: closed form on reference pairs") {
    REQUIRE(dist2_to_coset(Mat2::identity(), Mat2::identity()) <= 1e-30);
    // singular values of diag(2,1) are (2,1): nearest rotation is I
    REQUIRE(dist2_to_coset(Mat2::diag(2.0, 1.0), Mat2::identity()) ==
            Catch::Approx(1.0).margin(1e-13));
    REQUIRE(dist2_to_coset(2.0 * Mat2::identity(), Mat2::identity()) ==
            Catch::Approx(2.0).margin(1e-13));
}

TEST_CASE("coset distance matches the brute-force sweep") {
    Rng rng(77);
    for (int s = 0; s < 100; ++s) {
        const Mat2 m = rng.mat2(-2.0, 2.0);
        Mat2 q = rng.mat2(-2.0, 2.0);
        if (std::abs(det(q)) < 0.05) q = q + Mat2::identity();  // keep Q honestly invertible
        const double closed = dist2_to_coset(m, q);
        REQUIRE(closed == Catch::Approx(dist2_brute(m, q)).margin(1e-8));
    }
}

TEST_CASE("coset distance rejects singular Q") {
    REQUIRE_THROWS_AS(dist2_to_coset(Mat2::identity(), Mat2::diag(1.0, 0.0)), numeric_error);
}

TEST_CASE("nearest point in coset") {
    const Mat2 near_id = nearest_in_coset(Mat2::diag(2.0, 1.0), Mat2::identity());
    REQUIRE(frobenius(near_id - Mat2::identity()) <= 1e-14);

    const Mat2 r = Mat2::rotation(0.37);
    REQUIRE(frobenius(nearest_in_coset(r, Mat2::identity()) - r) <= 1e-14);

    REQUIRE_THROWS_WITH(nearest_in_coset(anticonformal({1.0, 0.0}), Mat2::identity()),
                        Catch::Matchers::ContainsSubstring("projection undefined"));

    Rng rng(5150);
    for (int s = 0; s < 200; ++s) {
        const Mat2 m = rng.mat2(-2.0, 2.0);
        Mat2 q = rng.mat2(-2.0, 2.0);
        if (std::abs(det(q)) < 0.05) q = q + Mat2::identity();
        if (norm(conformal_split(m * transpose(q)).x) < 1e-6) continue;
        const Mat2 p = nearest_in_coset(m, q);
        REQUIRE(frobenius2(m - p) == Catch::Approx(dist2_to_coset(m, q)).margin(1e-12));
        // the projection is a rotation times Q
        REQUIRE(std::abs(det(p) - det(q)) <= 1e-12 * std::abs(det(q)) + 1e-12);
    }
}

TEST_CASE("cof(R) = R on rotations") {
    Rng rng(31);
    for (int s = 0; s < 100; ++s) {
        const Mat2 r = Mat2::rotation(rng.angle());
        REQUIRE(frobenius(cof(r) - r) <= 1e-14);
    }
}

TEST_CASE("Mat3 determinant and rotations") {
    REQUIRE(det(Mat3::diag(0.5, 1.0, 2.0)) == Catch::Approx(1.0).margin(1e-15));
    const Mat3 a{{1, 2, 3, 4, 5, 6, 7, 8, 10}};
    REQUIRE(det(a) == Catch::Approx(-3.0).margin(1e-12));

    Rng rng(99);
    for (int s = 0; s < 50; ++s) {
        const double z = rng.uniform(-1.0, 1.0);
        const double rho = std::sqrt(1.0 - z * z);
        const double az = rng.angle();
        const Mat3 r = Mat3::axis_angle({rho * std::cos(az), rho * std::sin(az)}, z, rng.angle());
        const Mat3 should_be_id = transpose(r) * r;
        REQUIRE(frobenius2(should_be_id - Mat3::identity()) <= 1e-24);
        REQUIRE(det(r) == Catch::Approx(1.0).margin(1e-12));
    }
}
