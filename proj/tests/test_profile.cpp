#include <cmath>
#include <vector>

#include "doctest.h"
#include "malab/error.hpp"
#include "malab/profile.hpp"
#include "malab/quadrature.hpp"

using namespace malab;

namespace {

ProfileParams staged(double gamma, ProfileStage stage, double t0 = 0.05, double tt = 0.05) {
    ProfileParams p;
    p.gamma = gamma;
    p.t0 = t0;
    p.t0_tilde = tt;
    p.stage = stage;
    return p;
}

}  // namespace

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
    const GaussRule rule = gauss_legendre(24);
    double w = 0.0, m46 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        w += rule.weights[i];
        m46 += rule.weights[i] * std::pow(rule.nodes[i], 46);
    }
    CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(m46 == doctest::Approx(2.0 / 47.0).epsilon(1e-13));
    const double simpson = adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12);
    CHECK(std::abs(simpson - (std::exp(1.0) - 1.0)) < 1e-11);
}

TEST_CASE("g0 stage is the pure power profile") {
    const BoundaryProfile p = build_profile(staged(2.0, ProfileStage::G0));
    CHECK(eval_g(p, 0.0) == doctest::Approx(1.0 / 3.0));
    CHECK(eval_g(p, 1.0) == doctest::Approx(2.0 / 3.0));
    CHECK(eval_g(p, -0.7) == doctest::Approx((1.0 + std::pow(0.7, 3)) / 3.0));
    CHECK(F_op(p, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(F_op(p, 0.0) == 0.0);
    CHECK(eval_g_tilde(p, 0.0) == doctest::Approx(1.0 / 3.0));
    CHECK(eval_g_tilde(p, 1.0) == doctest::Approx(eval_g(p, 1.0)).epsilon(1e-15));
}

TEST_CASE("baseline identity F[g0](t) = |t|^(gamma-1)/gamma") {
    for (double gamma : {1.5, 2.0, 3.0}) {
        const BoundaryProfile p = build_profile(staged(gamma, ProfileStage::G0));
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double t = -3.0 + 6.0 * i / 199.0;
            worst = std::max(worst, std::abs(F_op(p, t) - std::pow(std::abs(t), gamma - 1.0) / gamma));
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("first surgery coefficients and parabola piece") {
    const BoundaryProfile p = build_profile(staged(2.0, ProfileStage::G1, 0.1));
    CHECK(p.a() == doctest::Approx(0.9995).epsilon(1e-15));
    CHECK(p.b() == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(eval_g(p, 0.05, 2) == doctest::Approx(0.1).epsilon(1e-14));
    // 2(g+1)ab / (g^2 (g+1)^2), frozen from an mpmath evaluation.
    CHECK(F_op(p, 0.0) == doctest::Approx(0.0249875).epsilon(1e-13));

    // One-sided finite differences agree across the seam t0 = 0.1.
    const double h = 1e-7;
    const double left_slope = (eval_g(p, 0.1 - h) - eval_g(p, 0.1 - 2 * h)) / h;
    const double right_slope = (eval_g(p, 0.1 + 2 * h) - eval_g(p, 0.1 + h)) / h;
    CHECK(std::abs(left_slope - 0.01) < 1e-6);
    CHECK(std::abs(right_slope - 0.01) < 1e-6);
    CHECK(eval_g(p, 0.1) == doctest::Approx(0.333666666666666667).epsilon(1e-15));
}

TEST_CASE("second derivative at a seam is undefined before mollification") {
    const BoundaryProfile p = build_profile(staged(2.0, ProfileStage::G1, 0.1));
    CHECK_THROWS_WITH_AS(eval_g(p, 0.1, 2), "seam derivative undefined", ProfileError);
    CHECK_THROWS_AS(F_op(p, -0.1), ProfileError);
    CHECK_NOTHROW(eval_g(p, 0.1, 1));
}

TEST_CASE("second surgery: matched parabola for g~") {
    const BoundaryProfile p = build_profile(staged(2.0, ProfileStage::G2, 0.05, 0.1));
    CHECK(p.a_tilde() == doctest::Approx(1.00790569415042094833).epsilon(1e-15));
    CHECK(p.b_tilde() == doctest::Approx(2.37170824512628449900).epsilon(1e-15));
    CHECK(eval_g_tilde(p, 0.05) == doctest::Approx(0.337944988254412219859).epsilon(1e-14));
    CHECK(F_tilde_op(p, 0.0) == doctest::Approx(3.18727766016837933200).epsilon(1e-13));
    CHECK(F_tilde_op(p, 1.0) == doctest::Approx(F_op(p, 1.0)).epsilon(1e-13));
    for (double t : {0.01, 0.3, 0.77, 2.5}) CHECK(F_tilde_op(p, t) == F_tilde_op(p, -t));
    CHECK(std::isfinite(rhs_bounds(p, 501).Lambda));
}

TEST_CASE("matching relation between g and g~") {
    const BoundaryProfile p = build_profile(ProfileParams{});
    const double g = p.gamma();
    for (int i = 0; i <= 60; ++i) {
        const double t = 0.5 + 1.5 * i / 60.0;
        const double s = std::pow(t, -1.0 / g);
        const double direct = std::pow(t, (g + 1.0) / g) * eval_g(p, s);
        CHECK(std::abs(eval_g_tilde(p, t) - direct) <= 1e-9);
        // d/dt of t^{(g+1)/g} g(t^{-1/g}).
        const double d_direct =
            (g + 1.0) / g * std::pow(t, 1.0 / g) * eval_g(p, s) - std::pow(t, (g + 1.0) / g) * eval_g(p, s, 1) * s / (g * t);
        CHECK(std::abs(eval_g_tilde(p, t, 1) - d_direct) <= 1e-9);
    }
}

TEST_CASE("derivatives of g~ agree with centred differences") {
    const BoundaryProfile p = build_profile(ProfileParams{});
    for (double t : {0.02, 0.049, 0.3, 0.8, 1.7, 6.0}) {
        const double h = 1e-5 * std::max(1.0, t);
        const double d1 = (eval_g_tilde(p, t + h) - eval_g_tilde(p, t - h)) / (2 * h);
        const double d2 = (eval_g_tilde(p, t + h, 1) - eval_g_tilde(p, t - h, 1)) / (2 * h);
        CHECK(eval_g_tilde(p, t, 1) == doctest::Approx(d1).epsilon(1e-7));
        CHECK(eval_g_tilde(p, t, 2) == doctest::Approx(d2).epsilon(1e-6));
    }
}

TEST_CASE("mollified profile is even, convex and C^2 across seams") {
    ProfileParams params;
    params.moll_eps = 1e-3;
    params.cutoff_width = 5e-3;
    const BoundaryProfile p = build_profile(params);
    REQUIRE(p.seams().size() == 4);
    for (const SeamResidual& r : seam_residuals(p)) {
        CHECK(r.jump_g <= 1e-8);
        CHECK(r.jump_dg <= 1e-8);
        CHECK(r.jump_d2g <= 1e-6);
    }
    for (int i = -400; i <= 400; ++i) {
        const double t = 6.0 * i / 400.0;
        CHECK(eval_g(p, t) == eval_g(p, -t));
        CHECK(eval_g(p, t, 2) >= 0.0);
        CHECK(F_op(p, t) == F_op(p, -t));
    }
}

TEST_CASE("mollification stays within C * eps of g2") {
    for (double eps : {1e-2, 1e-3}) {
        ProfileParams params;
        params.moll_eps = eps;
        params.cutoff_width = eps == 1e-2 ? 0.04 : 5e-3;
        const BoundaryProfile p = build_profile(params);
        const double c = mollification_constant(p);
        CHECK(c <= 10.0);
        double worst = 0.0;
        for (double seam : p.seams()) {
            for (int k = -50; k <= 50; ++k) {
                const double t = seam + params.cutoff_width * k / 50.0;
                worst = std::max(worst, std::abs(eval_g(p, t) - p.g2(t)));
            }
        }
        CHECK(worst <= 10.0 * eps);
    }
}

TEST_CASE("rhs bounds audit") {
    SUBCASE("g0 has a degenerate minimum at 0") {
        const RhsBounds b = rhs_bounds(build_profile(staged(2.0, ProfileStage::G0)), 201);
        CHECK(b.lambda == 0.0);
        CHECK(b.argmin == 0.0);
        CHECK_FALSE(b.argmin_in_tilde);
        CHECK_FALSE(b.positive());
        CHECK_THROWS_AS(require_positive(b), ProfileError);
    }
    SUBCASE("default construction is strictly positive and bounded") {
        const RhsBounds b = rhs_bounds(build_profile(ProfileParams{}), 2001);
        CHECK(b.lambda > 0.0);
        CHECK(b.lambda == doctest::Approx(0.01249921875).epsilon(1e-3));
        // The unmollified maximum is F~(0) = 4.4846...; the cutoff transition may
        // overshoot it slightly but only by a few percent.
        CHECK(b.Lambda >= 4.48463595499957939 * (1 - 1e-9));
        CHECK(b.Lambda <= 4.48463595499957939 * 1.05);
    }
    SUBCASE("a surgery that is too wide is rejected with the failing interval") {
        ProfileParams params;
        params.gamma = 4.0;
        params.t0 = 0.9;
        params.cutoff_width = 5e-3;
        CHECK_THROWS_WITH_AS(build_profile(params), doctest::Contains("first surgery"), ProfileError);
    }
}

TEST_CASE("parameter validation") {
    ProfileParams p;
    p.gamma = 1.0;
    CHECK_THROWS_AS(build_profile(p), ProfileError);
    p = ProfileParams{};
    p.cutoff_width = 5e-4;  // below moll_eps
    CHECK_THROWS_AS(build_profile(p), ProfileError);
    p = ProfileParams{};
    p.cutoff_width = 0.2;  // wider than half the seam gap
    CHECK_THROWS_AS(build_profile(p), ProfileError);
    CHECK_THROWS_AS(stage_from_string("g3"), ProfileError);
    CHECK(stage_from_string(to_string(ProfileStage::G2)) == ProfileStage::G2);
}

TEST_CASE("extended line") {
    const BoundaryProfile p = build_profile(ProfileParams{});
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(std::isinf(eval_g(p, inf)));
    CHECK(F_op(p, inf) == doctest::Approx(F_tilde_op(p, 0.0)));
    CHECK(F_op(p, -inf) == F_op(p, inf));
}
