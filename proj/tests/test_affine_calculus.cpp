#include <cmath>

#include "doctest.h"
#include "horseshoe/affine_calculus.hpp"
#include "horseshoe/errors.hpp"
#include "horseshoe/verify_suite.hpp"

using namespace hs;

namespace {

const Rect kUnit{{-1.0, 1.0}, {-1.0, 1.0}};

ImplicitMap linear03() { return make_affine_map(kUnit, 0, 0, 0.0, 0.0, 0.3, 0.0, 0.3, 0.0); }

ImplicitMap quadratic03() {
    auto A = ScalarField2::fit(kUnit, 2, 2, [](double y, double x) { return 0.3 * x + 0.01 * y * y; });
    auto B = ScalarField2::fit(kUnit, 2, 2, [](double y, double x) { return 0.3 * y + 0.01 * x * x; });
    return make_map(kUnit, 0, 0, A, B);
}

PlanarDiffeo linear_diffeo() {
    return {[](double x, double y, double out[2], double jac[4]) {
        out[0] = x / 0.3;
        out[1] = 0.3 * y;
        jac[0] = 1 / 0.3;
        jac[1] = 0;
        jac[2] = 0;
        jac[3] = 0.3;
    }};
}

Strip vertical_strip(const Interval& over, std::function<double(double)> lo, std::function<double(double)> hi) {
    Strip s;
    s.over = over;
    s.lower = Cheb1::fit(over, 16, lo);
    s.upper = Cheb1::fit(over, 16, hi);
    return s;
}

}  // namespace

TEST_CASE("widths of linear, quadratic and composite maps") {
    auto w = widths(linear03());
    CHECK(w.P == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(w.Q == doctest::Approx(0.3).epsilon(1e-15));
    auto wq = widths(quadratic03());
    CHECK(wq.P == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(wq.Q == doctest::Approx(0.3).epsilon(1e-12));
    auto c = simple_compose(linear03(), linear03());
    auto wc = widths(c);
    CHECK(wc.P == doctest::Approx(0.09).epsilon(1e-14));
    CHECK(wc.Q == doctest::Approx(0.09).epsilon(1e-14));
}

TEST_CASE("cone condition margins") {
    auto r = check_cone(linear03(), {2, 1, 1});
    CHECK(r.ok);
    CHECK(r.margin == doctest::Approx(0.4).epsilon(1e-14));
    CHECK_FALSE(check_cone(linear03(), {4, 1, 1}).ok);
    CHECK_FALSE(check_cone(identity_map(kUnit, 0), {2, 1, 1}).ok);
}

TEST_CASE("distortion of linear and quadratic maps") {
    CHECK(distortion(linear03()) == 0.0);
    CHECK(distortion(quadratic03()) == doctest::Approx(0.02).epsilon(1e-10));
    auto c = simple_compose(quadratic03(), quadratic03());
    double d = distortion(c);
    CHECK(d <= 0.02 + 10 * 0.3 * 0.04);
    auto flat = make_affine_map(kUnit, 0, 0, 0, 0, 0.0, 0, 0.3, 0);
    CHECK_THROWS_AS(distortion(flat), Error);
}

TEST_CASE("from_diffeo on a linear hyperbolic map") {
    auto P = vertical_strip(kUnit.y, [](double) { return -0.3; }, [](double) { return 0.3; });
    auto F = from_diffeo(linear_diffeo(), P, kUnit);
    for (double y : {-0.8, 0.1, 1.0})
        for (double x : {-1.0, 0.35}) {
            CHECK(F.A(y, x) == doctest::Approx(0.3 * x).epsilon(1e-13));
            CHECK(F.B(y, x) == doctest::Approx(0.3 * y).epsilon(1e-13));
        }
}

TEST_CASE("from_diffeo on a sheared map has small forward residual") {
    PlanarDiffeo phi{[](double x, double y, double out[2], double jac[4]) {
        double u = x + 0.01 * y * y;
        out[0] = u / 0.3;
        out[1] = 0.3 * y;
        jac[0] = 1 / 0.3;
        jac[1] = 0.02 * y / 0.3;
        jac[2] = 0;
        jac[3] = 0.3;
    }};
    auto P = vertical_strip(kUnit.y, [](double y) { return -0.3 - 0.01 * y * y; },
                            [](double y) { return 0.3 - 0.01 * y * y; });
    auto F = from_diffeo(phi, P, kUnit);
    double worst = 0.0;
    for (int a = 0; a <= 20; ++a)
        for (int b = 0; b <= 20; ++b) {
            double y = -1 + 0.1 * a, x = -1 + 0.1 * b;
            double out[2], jac[4];
            phi.eval(F.A(y, x), y, out, jac);
            worst = std::max({worst, std::abs(out[0] - x), std::abs(out[1] - F.B(y, x))});
        }
    CHECK(worst < 1e-10);
    CHECK(F.A(0.5, 0.2) == doctest::Approx(0.3 * 0.2 - 0.01 * 0.25).epsilon(1e-12));
}

TEST_CASE("from_diffeo rejects a folded strip") {
    PlanarDiffeo fold{[](double x, double y, double out[2], double jac[4]) {
        out[0] = (x / 0.3) * (x / 0.3);
        out[1] = 0.3 * y;
        jac[0] = 2 * x / 0.09;
        jac[1] = 0;
        jac[2] = 0;
        jac[3] = 0.3;
    }};
    auto P = vertical_strip(kUnit.y, [](double) { return -0.3; }, [](double) { return 0.3; });
    try {
        from_diffeo(fold, P, kUnit);
        FAIL("expected ProjectionNotInvertible");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ProjectionNotInvertible);
    }
}

TEST_CASE("composition of linear maps") {
    auto c = simple_compose(linear03(), linear03());
    CHECK(c.is_affine());
    CHECK(c.A(0.4, 0.7) == doctest::Approx(0.09 * 0.7).epsilon(1e-15));
    CHECK(c.B(0.4, 0.7) == doctest::Approx(0.09 * 0.4).epsilon(1e-15));
}

TEST_CASE("identity is neutral for composition") {
    auto F = quadratic03();
    Rect id_rect{F.image.over, F.rect.x};
    id_rect = Rect{{-0.5, 0.5}, {-1.0, 1.0}};
    auto c = simple_compose(F, identity_map(id_rect, 0));
    for (double y : {-0.9, 0.0, 0.8})
        for (double x : {-0.9, 0.3}) {
            CHECK(c.A(y, x) == doctest::Approx(F.A(y, x)).epsilon(1e-12));
            CHECK(c.B(y, x) == doctest::Approx(F.B(y, x)).epsilon(1e-12));
        }
}

TEST_CASE("composition of perturbed maps matches every derivative formula") {
    auto F = quadratic03();
    auto c = simple_compose(F, F);
    auto rep = verify_composition_calculus(F, F, c, {});
    CHECK(rep.ok);
    CHECK(rep.max_rel < 1e-6);
}

TEST_CASE("linear pair has zero discrepancy") {
    auto c = simple_compose(linear03(), linear03());
    VerifyOptions opt;
    opt.fd_step = 0.2;  // differences of an affine field are exact up to rounding
    auto rep = verify_composition_calculus(linear03(), linear03(), c, opt);
    CHECK(rep.max_abs < 1e-12);
}

TEST_CASE("fault injection flags exactly the corrupted formula") {
    auto F = quadratic03();
    auto c = simple_compose(F, F);
    VerifyOptions opt;
    opt.corrupt = "A''_y";
    auto rep = verify_composition_calculus(F, F, c, opt);
    auto flagged = rep.flagged();
    REQUIRE(flagged.size() == 1);
    CHECK(flagged[0] == "A''_y");
}

TEST_CASE("time reversal swaps the widths") {
    auto F = quadratic03();
    auto G = time_reverse(F);
    auto wf = widths(F), wg = widths(G);
    CHECK(wg.P == doctest::Approx(wf.Q).epsilon(1e-14));
    CHECK(wg.Q == doctest::Approx(wf.P).epsilon(1e-14));
    CHECK(G.A(0.2, -0.4) == doctest::Approx(F.B(-0.4, 0.2)).epsilon(1e-15));
}

TEST_CASE("delta floor guards degenerate compositions") {
    auto F = make_affine_map(kUnit, 0, 0, 0, 0, 0.3, 0, 0.3, 1.0);
    auto Fp = make_affine_map(kUnit, 0, 0, 0, 1.0, 0.3, 0, 0.3, 0);
    try {
        simple_compose(F, Fp);
        FAIL("expected DeltaDegenerate");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DeltaDegenerate);
    }
}

TEST_CASE("random pairs: formulas, cone upgrade, widths and determinant") {
    auto s = run_simple_suite(6, 7);
    CHECK(s.ok);
    CHECK(s.max_rel < 1e-5);
    auto c = run_cone_suite(20, 11);
    CHECK(c.cone_pass == c.pairs);
    CHECK(c.ratio_min >= 0.1);
    CHECK(c.ratio_max <= 10.0);
    CHECK(c.linear_ratio_err < 1e-10);
    CHECK(c.distortion_constant <= 10.0);
    CHECK(c.det_rel_err < 1e-8);
}
