#include <cmath>

#include "doctest.h"
#include "horseshoe/errors.hpp"
#include "horseshoe/serialize.hpp"

using namespace hs;

TEST_CASE("field and map JSON round trips are bit-exact") {
    Rect r{{-1.0, 1.0}, {-0.5, 2.0}};
    auto A = ScalarField2::fit(r, 6, 7, [](double y, double x) { return 0.3 * x + 0.01 * std::sin(y * x) + 1.0 / 3; });
    auto B = ScalarField2::fit(r, 5, 4, [](double y, double x) { return 0.3 * y + 0.02 * std::exp(x) / 7; });
    auto F = make_map(r, 0, 1, A, B);
    auto text = to_json(F).dump();
    auto G = map_from_json(json::parse(text));
    CHECK(same_bits(F, G));
    CHECK(same_bits(A, field_from_json(json::parse(to_json(A).dump()))));
    // The documented layout.
    auto j = to_json(A);
    CHECK(j.contains("domain"));
    CHECK(j["degrees"][0] == 6);
    CHECK(j["coeffs"].size() == 7u * 8u);
    auto m = to_json(F);
    CHECK(m["strips"].contains("phi_minus"));
    CHECK(m["strips"].contains("phi_plus"));
}

TEST_CASE("parabolic pair round trip") {
    Rect r0{{-1.0, 1.0}, {-2.0, 2.0}}, r1{{-2.0, 2.0}, {-1.0, 1.0}};
    auto F0 = make_affine_map(r0, 0, 0, 0.0, 0.0, 0.3, 0.0, 0.3, 0.0);
    auto F1 = make_affine_map(r1, 1, 1, 0.0, 0.0, 0.3, 0.0, 0.3, 0.0);
    auto p = parabolic_compose(F0, FoldMap{FoldConfig{}, 1.0}, F1);
    auto q = pair_from_json(json::parse(to_json(p).dump()));
    CHECK(same_bits(p.plus, q.plus));
    CHECK(same_bits(p.minus, q.minus));
    CHECK(same_bits(p.W_plus, q.W_plus));
    CHECK(q.disp.delta == p.disp.delta);
    CHECK(q.corner_cbar == p.corner_cbar);
}

TEST_CASE("malformed documents are rejected") {
    CHECK_THROWS_AS(field_from_json(json{{"domain", {{"y", {0, 1}}, {"x", {0, 1}}}}, {"degrees", {1, 1}}, {"coeffs", {1, 2, 3}}}), Error);
    CHECK_THROWS_AS(map_from_json(json::object()), Error);
    CHECK(fmt17(0.1) == "0.10000000000000001");
}
