#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "twowell/energy.hpp"
#include "twowell/mat.hpp"
#include "twowell/rng.hpp"
#include "twowell/wells.hpp"

using namespace twowell;

TEST_CASE("model values at reference points") {
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);
    const EnergyModel dir = dirichlet_model();
    const EnergyModel tw = two_well_model(p);

    REQUIRE(dir.eval(Mat2::identity()) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(tw.eval(Mat2::identity()) <= 1e-20);
    REQUIRE(tw.eval(Mat2::rotation(0.5) * p.H()) <= 1e-20);
    // dist^2 to SO(2) is 2, to SO(2)H is 2.25; the two-well energy takes the min
    REQUIRE(tw.eval(2.0 * Mat2::identity()) == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(tw.eval(Mat2{0.7, -0.6, 0.15, 1.3}) == Catch::Approx(0.2904981276).margin(1e-9));
}

TEST_CASE("analytic gradients match central differences") {
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);
    Rng rng(2718);
    for (const EnergyModel& model : {dirichlet_model(), two_well_model(p)}) {
        int checked = 0;
        while (checked < 200) {
            const Mat2 m = rng.mat2(-2.0, 2.0);
            if (model.name == "two_well") {
                // stay away from the well-equidistant locus where F is not smooth
                const double d0 = dist2_to_coset(m, Mat2::identity());
                const double d1 = dist2_to_coset(m, p.H());
                if (std::abs(d0 - d1) < 0.1) continue;
                if (std::min(d0, d1) < 1e-4) continue;
            }
            const Mat2 ga = model.grad(m);
            const Mat2 gf = model.grad_fd(m);
            REQUIRE(frobenius(ga - gf) <= 1e-5 * std::max(1.0, frobenius(ga)));
            ++checked;
        }
    }
}

TEST_CASE("dirichlet probes: frame indifference and exact uniform convexity") {
    const ConvexityReport rep = convexity_probes(dirichlet_model(), 300, 11);
    REQUIRE(rep.frame_indiff_max <= 1e-12);
    // F(X) - F(Y) - DF(Y):(X-Y) = |X-Y|^2 / 2 identically
    REQUIRE(rep.uniform_convexity_lower == Catch::Approx(0.5).margin(1e-9));
    // int <X, grad phi> vanishes for compactly supported phi, so the ratio is exact
    REQUIRE(rep.quasiconvexity_ratio_min == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(rep.rank1_min_second_diff >= -1e-12);
}

TEST_CASE("two-well probes: frame indifferent but not rank-one convex") {
    const TwoWellParams p = TwoWellParams::from_lambda(0.5);
    const ConvexityReport rep = convexity_probes(two_well_model(p), 300, 12);
    REQUIRE(rep.frame_indiff_max <= 1e-12);
    // the segment [I, R_{theta*}H] has F = 0 at the ends and ~0.29 at the midpoint
    REQUIRE(rep.rank1_min_second_diff < -0.1);
    // uniform convexity fails spectacularly for a two-well landscape
    REQUIRE(rep.uniform_convexity_lower < 0.25);
}

TEST_CASE("probe input validation") {
    REQUIRE_THROWS_AS(convexity_probes(dirichlet_model(), 0, 1), config_error);
}
