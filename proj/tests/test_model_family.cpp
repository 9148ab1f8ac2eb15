#include <cmath>

#include "doctest.h"
#include "horseshoe/errors.hpp"
#include "horseshoe/model_family.hpp"
#include "horseshoe/serialize.hpp"

using namespace hs;

namespace {

FamilyConfig symmetric(double lam) {
    FamilyConfig c;
    c.lambda_s = lam;
    c.lambda_u = 1.0 / lam;
    return c;
}

}  // namespace

TEST_CASE("family dimensions and (H4)") {
    auto f3 = make_family(symmetric(1.0 / 3.0));
    CHECK(f3.d_s0 == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-14));
    auto f = make_family();
    CHECK(f.d_s0 == doctest::Approx(0.5506).epsilon(1e-3));
    CHECK(f.h4);
    CHECK(f.warnings.empty());
    auto bad = make_family(symmetric(0.37));
    CHECK(bad.d_s0 == doctest::Approx(0.697).epsilon(1e-3));
    CHECK_FALSE(bad.h4);
    REQUIRE_FALSE(bad.warnings.empty());
    CHECK(bad.warnings[0].rfind("H4Violated", 0) == 0);
    CHECK_THROWS_AS(make_family(symmetric(0.6)), Error);
}

TEST_CASE("transition maps: affine branches and boundary compatibility") {
    auto f = make_family();
    double al = 1.0 / f.cfg.lambda_u;
    for (auto [a, b] : f.transitions) {
        auto g = transition_map(f, a, b);
        CHECK(g.src == a);
        CHECK(g.dst == b);
        CHECK(g.A(0.3, 0.7) == doctest::Approx(f.c_offset(b) + al * 0.7).epsilon(1e-15));
        CHECK(g.B(0.3, 0.7) == doctest::Approx(f.d_offset(a) + f.cfg.lambda_s * 0.3).epsilon(1e-15));
        // Edges of R_{a'} map onto edges of P_{aa'}; edges of R_a onto edges of Q_{aa'}.
        auto s = transition_strip(f, a, b);
        CHECK(g.A(0.5, 0.0) == s.lower(0.5));
        CHECK(g.A(0.5, 1.0) == s.upper(0.5));
        CHECK(check_cone(g, {2.0, 1.0, 1.0}).ok);
        CHECK(distortion(g) == 0.0);
        // Oracle: the explicit branch through from_diffeo.
        auto h = from_diffeo(branch_diffeo(f, a, b), s, Rect{{0, 1}, {0, 1}}, a, b);
        for (double y : {0.1, 0.6})
            for (double x : {0.2, 0.9}) {
                CHECK(h.A(y, x) == doctest::Approx(g.A(y, x)).epsilon(1e-12));
                CHECK(h.B(y, x) == doctest::Approx(g.B(y, x)).epsilon(1e-12));
            }
    }
    try {
        transition_map(f, 0, 2);
        FAIL("expected NotATransition");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotATransition);
    }
}

TEST_CASE("pure cylinders: widths and distortion") {
    auto f = make_family();
    std::string w = "0";
    for (int n = 1; n <= 12; ++n) {
        w.push_back(n % 3 == 0 ? '1' : '0');
        auto m = pure_cylinder_map(f, w);
        auto ws = widths(m);
        CHECK(ws.P == doctest::Approx(std::pow(f.cfg.lambda_s, n)).epsilon(1e-13));
        CHECK(ws.Q == doctest::Approx(std::pow(f.cfg.lambda_s, n)).epsilon(1e-13));
        CHECK(distortion(m) == 0.0);
    }
    auto c = simple_compose(pure_cylinder_map(f, "0110"), pure_cylinder_map(f, "01"));
    auto d = pure_cylinder_map(f, "01101");
    CHECK(c.A(0.4, 0.3) == doctest::Approx(d.A(0.4, 0.3)).epsilon(1e-14));
    CHECK(c.B(0.4, 0.3) == doctest::Approx(d.B(0.4, 0.3)).epsilon(1e-14));
}

TEST_CASE("perturbed branches keep the Markov boundaries and have bounded distortion") {
    auto cfg = symmetric(0.284);
    cfg.nonlinearity = 0.01;
    auto f = make_family(cfg);
    auto g = transition_map(f, 1, 0);
    CHECK(g.A(0.3, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(g.A(0.3, 1.0) == doctest::Approx(f.alpha()).epsilon(1e-14));
    double D = distortion(g);
    CHECK(D > 0.0);
    CHECK(D < 0.2);
    auto deep = pure_cylinder_map(f, "0100110101");
    CHECK(distortion(deep) < 2 * 0.2);
    CHECK(check_cone(deep, {2.0, 1.0, 1.0}).ok);
    // Secant description agrees with the refit.
    auto p = pure_cylinder(f, "0100110101");
    CHECK(deep.A(0.5, 0.0) == doctest::Approx(p.a0).epsilon(1e-12));
    CHECK(deep.A(0.5, 1.0) == doctest::Approx(p.a0 + p.ax).epsilon(1e-12));
}

TEST_CASE("tongues") {
    auto f = make_family();
    try {
        tongues(f, 0.0);
        FAIL("expected NotUnfolded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotUnfolded);
    }
    auto T = tongues(f, f.cfg.eps0);
    CHECK(T.thickness_u > 0.0);
    CHECK(T.thickness_u <= 2.0 * f.cfg.eps0);
    CHECK(T.thickness_s <= 2.0 * f.cfg.eps0);
    CHECK(T.w_max == doctest::Approx(std::sqrt(f.cfg.eps0)).epsilon(1e-12));
    // L_u inside the gap of R_{a_u}.
    for (double x : T.Lu_roof.x) CHECK((x > f.alpha() && x < 1.0 - f.alpha()));
    CHECK(tongue_roundtrip_distance(f, T) < 1e-8);
    CHECK(tangency_normalization_error(f, {1e-5, 1e-4, 2e-4, 1e-3}) < 1e-10);
}

TEST_CASE("special rectangles bracket eps0") {
    auto f = make_family();
    auto s = special_rectangles(f);
    CHECK(s.n_s == 6);
    CHECK(s.n_u == 6);
    CHECK(s.Ps_word == "0000000");
    CHECK(s.Qu_word == "1111111");
    double r = s.Ps_width / f.cfg.eps0;
    CHECK(r >= 2.0);
    CHECK(r <= 2.0 / f.cfg.lambda_s);
    // P_s holds the local stable manifold {x = 0} and the whole tongue L_s.
    auto p = pure_cylinder(f, s.Ps_word);
    CHECK(p.a0 == 0.0);
    CHECK(p.a0 + p.ax >= tongues(f, 2.0 * f.cfg.eps0).thickness_s);
}

TEST_CASE("box counting and coding consistency") {
    auto f = make_family();
    CHECK(box_counting_dimension(f, 14) == doctest::Approx(f.d_s0).epsilon(0.03));
    auto rep = coding_check(f, 60, 6);
    CHECK(rep.survivors > 0);
    CHECK(rep.mismatches == 0);
    CHECK(rep.uncovered == 0);
}

TEST_CASE("family config JSON round trip and validation") {
    auto c = symmetric(0.3);
    c.nonlinearity = 0.01;
    auto j = to_json(c);
    auto d = family_config_from_json(j);
    CHECK(d.lambda_s == c.lambda_s);
    CHECK(d.lambda_u == c.lambda_u);
    CHECK(d.nonlinearity == c.nonlinearity);
    nlohmann::json bad = {{"lambda_s", 0.3}, {"colour", 1}};
    CHECK_THROWS_AS(family_config_from_json(bad), Error);
    auto only = family_config_from_json({{"lambda_s", 0.25}});
    CHECK(only.lambda_u == 4.0);
}

TEST_CASE("geometry CSV") {
    auto f = make_family();
    auto csv = geometry_csv(f, f.cfg.eps0, 11);
    CHECK(csv.rfind("kind,id,index,x,y\n", 0) == 0);
    CHECK(csv.find("Lu_roof") != std::string::npos);
    CHECK(csv.find("strip,01") != std::string::npos);
}
