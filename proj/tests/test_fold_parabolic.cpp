#include <cmath>

#include "doctest.h"
#include "horseshoe/errors.hpp"
#include "horseshoe/fold_parabolic.hpp"
#include "horseshoe/verify_suite.hpp"

using namespace hs;

namespace {

const Rect kR0{{-1.0, 1.0}, {-2.0, 2.0}};
const Rect kR1{{-2.0, 2.0}, {-1.0, 1.0}};

// A0 = 0.3 x_u, B0 = 0.3 y0 and A1 = 0.3 x1, B1 = 0.3 y_s.
ImplicitMap toy0() { return make_affine_map(kR0, 0, 0, 0.0, 0.0, 0.3, 0.0, 0.3, 0.0); }
ImplicitMap toy1() { return make_affine_map(kR1, 1, 1, 0.0, 0.0, 0.3, 0.0, 0.3, 0.0); }

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("model fold jets") {
    FoldMap G{FoldConfig{}, 1.0};
    CHECK(G.theta(0.3, 0.3).v == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(G.Xu(0.7, 0.2).v == 0.7);
    CHECK(G.Ys(-0.4, 0.2).v == -0.4);
    double xs, ys;
    G.forward(0.5, 0.1, xs, ys);
    CHECK(xs == doctest::Approx(1.0 - 0.1 - 0.25).epsilon(1e-13));
    CHECK(ys == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(G.intersection_count(0.1, 0.2) == 2);
    CHECK(G.intersection_count(0.8, 0.8) == 0);
    FoldConfig big;
    big.t_max = 9.0;
    CHECK(code_of([&] { make_model_fold(big, 1.0); }) == ErrorCode::InvalidGeometry);
}

TEST_CASE("linear toy: tangency functional and displacement quadruple") {
    FoldMap G{FoldConfig{}, 1.0};
    auto J = make_jets(toy0(), G, toy1());
    for (double w : {-1.0, 0.0, 0.6})
        for (double y0 : {-0.5, 0.2})
            for (double x1 : {-0.9, 0.4})
                CHECK(tangency_C(J, w, y0, x1) ==
                      doctest::Approx(w * w - 1.0 + 0.3 * y0 + 0.3 * x1).epsilon(1e-13));
    auto m = tangency_min(J, 0.2, 0.4);
    CHECK(std::abs(m.w_min) < 1e-13);
    CHECK(m.cww == doctest::Approx(2.0));
    auto q = displacement(toy0(), G, toy1());
    CHECK(q.delta == doctest::Approx(0.4).epsilon(1e-13));
    CHECK(q.delta_L == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(q.delta_R == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(q.delta_LR == doctest::Approx(1.6).epsilon(1e-13));
    auto q6 = displacement(toy0(), G.at(0.6), toy1());
    CHECK(std::abs(q6.delta) < 1e-13);
    auto series = displacement_over(toy0(), G, toy1(), {0.8, 1.0, 1.2});
    CHECK(series[2].delta - series[0].delta == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("linear toy: parabolic composition") {
    FoldMap G{FoldConfig{}, 1.0};
    auto pair = parabolic_compose(toy0(), G, toy1());
    for (double y0 : {-1.0, -0.3, 0.5, 1.0})
        for (double x1 : {-1.0, 0.2, 0.9}) {
            double r = std::sqrt(1.0 - 0.3 * y0 - 0.3 * x1);
            CHECK(pair.plus.A(y0, x1) == doctest::Approx(0.3 * r).epsilon(1e-9));
            CHECK(pair.minus.A(y0, x1) == doctest::Approx(-0.3 * r).epsilon(1e-9));
            CHECK(pair.plus.B(y0, x1) == doctest::Approx(0.3 * r).epsilon(1e-9));
            CHECK(pair.W_plus(y0, x1) == doctest::Approx(r).epsilon(1e-9));
        }
    auto wp = widths(pair.plus);
    CHECK(wp.P == doctest::Approx(0.045 / std::sqrt(0.4)).epsilon(1e-8));
    // Branch symmetry: A- = -A+, B- = -B+.
    CHECK(widths(pair.minus).P == doctest::Approx(wp.P).epsilon(1e-10));
    CHECK(widths(pair.minus).Q == doctest::Approx(wp.Q).epsilon(1e-10));
    auto est = check_parabolic_estimates(pair, toy0(), G, toy1());
    CHECK(est.ok);
    CHECK(est.width_constant <= 10.0);
    CHECK(est.distortion_constant <= 10.0);
}

TEST_CASE("linear toy: width law constant") {
    FoldMap G{FoldConfig{}, 1.0};
    auto pair = parabolic_compose(toy0(), G, toy1());
    double ratio = widths(pair.plus).P / (0.3 * 0.3 / std::sqrt(pair.disp.delta));
    CHECK(ratio == doctest::Approx(0.5).epsilon(1e-6));
    auto est = check_parabolic_estimates(pair, toy0(), G, toy1());
    CHECK(est.width_P_ratio == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(est.width_constant == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("parabolic composition errors") {
    FoldMap G{FoldConfig{}, 0.5};
    auto c = code_of([&] { parabolic_compose(toy0(), G, toy1()); });
    CHECK((c == ErrorCode::NoIntersection || c == ErrorCode::PC2Violated));
    auto c2 = code_of([&] { parabolic_compose(toy0(), G.at(-1.0), toy1()); });
    CHECK(c2 == ErrorCode::NoIntersection);
    auto steep = make_affine_map(kR1, 1, 1, 0.0, 0.1, 0.3, 0.0, 0.3, 0.0);
    CHECK(code_of([&] { parabolic_compose(toy0(), G.at(1.0), steep); }) == ErrorCode::PC1Violated);
    ParabolicOptions strict;
    strict.enforce_pc2 = true;
    CHECK(code_of([&] { parabolic_compose(toy0(), G.at(1.0), toy1(), strict); }) == ErrorCode::PC2Violated);
}

TEST_CASE("tangency functional fields") {
    FoldMap G{FoldConfig{}, 1.0};
    auto T = tangency_functional(toy0(), G, toy1());
    CHECK(T.Cbar(0.3, -0.2) == doctest::Approx(-1.0 + 0.09 - 0.06).epsilon(1e-11));
    CHECK(std::abs(T.Wmin(0.3, -0.2)) < 1e-11);
    CHECK(T.C(0.5, 0.3, -0.2) == doctest::Approx(0.25 - 1.0 + 0.09 - 0.06).epsilon(1e-13));
}

TEST_CASE("parabolic formulas against finite differences") {
    VerifyOptions opt;
    opt.points = 4;
    auto rep = run_parabolic_suite(2, 5, opt);
    for (const auto& [name, rel] : rep.per_formula) {
        INFO(name);
        CHECK(rel < 1e-5);
    }
    CHECK(rep.per_formula.size() >= 75);
    CHECK(rep.ok);
    CHECK(rep.cw_dev < 0.05);
    CHECK(rep.cww_dev < 0.05);
    CHECK(rep.ordering_ok);
    CHECK(rep.max_constant <= 10.0);
    CHECK(rep.dt_cbar_min > 0.9);
    CHECK(rep.dt_cbar_max < 1.1);
}

TEST_CASE("parabolic fault injection is detected") {
    VerifyOptions opt;
    opt.points = 2;
    opt.corrupt = "A_yy";
    opt.include_t = false;
    auto rep = run_parabolic_suite(1, 5, opt);
    CHECK_FALSE(rep.ok);
    CHECK(rep.per_formula["A_yy"] > 1e-5);
}

TEST_CASE("Lipschitz recursion for vertical-like families") {
    auto F = make_affine_map(Rect{{-1, 1}, {-1, 1}}, 0, 0, 0.0, 0.0, 0.3, 0.0, 0.3, 0.0);
    auto fit = lipschitz_recursion_fit(F, 0.0, 0.5, {0.25, 0.5, 1.0});
    CHECK(fit.a <= 1.0);
    CHECK(fit.formula_rel < 1e-5);
    CHECK_THROWS_AS(lipschitz_recursion_check(F, CurveFamily{[](double, double s) {
                                                                 Jet3 j;
                                                                 j.v = s * s;
                                                                 j.x = 2 * s;
                                                                 return j;
                                                             },
                                                             Interval{-0.5, 0.5}}),
                    Error);
}

TEST_CASE("Lipschitz recursion through the fold") {
    FoldMap G{FoldConfig{}, 1.0};
    for (double q : {0.3, 0.09, 0.027}) {
        INFO(q);
        auto F0 = make_affine_map(kR0, 0, 0, 0.0, 0.0, q, 0.0, q, 0.0);
        auto fit = lipschitz_recursion_fit(F0, G, 0.0, 0.005, {0.25, 0.5, 1.0});
        CHECK(fit.a <= 10.0 * std::sqrt(q));
        CHECK(fit.C >= 0.0);
        auto F = make_affine_map(Rect{{-1, 1}, {-1, 1}}, 0, 0, 0.0, 0.0, q, 0.0, q, 0.0);
        auto lin = lipschitz_recursion_fit(F, 0.0, 0.5, {0.25, 0.5, 1.0});
        CHECK(lin.a == doctest::Approx(q).epsilon(1e-6));
    }
}
