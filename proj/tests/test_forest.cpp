#include "doctest.h"
#include "horseshoe/errors.hpp"
#include "horseshoe/forest.hpp"

using namespace hs;

TEST_CASE("forest order and validation") {
    Forest f({-1, 0, 0, 1});
    CHECK(f.leq(3, 0));
    CHECK(f.leq(3, 1));
    CHECK_FALSE(f.leq(3, 2));
    CHECK_FALSE(f.comparable(1, 2));
    CHECK(f.max(3, 0) == 0);
    CHECK(f.up(3) == std::vector<int>{3, 1, 0});
    CHECK_THROWS_AS(Forest({1, 0}), Error);
    // Diamond: node 0 below two incomparable nodes.
    std::vector<std::vector<bool>> diamond{{true, true, true}, {false, true, false}, {false, false, true}};
    try {
        Forest::from_order(diamond);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotAForest);
    }
    std::vector<std::vector<bool>> chain{{true, true, true}, {false, true, true}, {false, false, true}};
    auto c = Forest::from_order(chain);
    CHECK(c.parent(0) == 1);
    CHECK(c.parent(1) == 2);
    CHECK(c.parent(2) == -1);
}

TEST_CASE("two-factor envelope examples") {
    // a1 > a2 and b1 > b2 encoded as node 0 above node 1.
    ForestProduct X{{Forest({-1, 0}), Forest({-1, 0})}};
    CHECK(ch_envelope(X, {}).empty());
    PointSet A{{1, 0}, {0, 1}};
    auto env = ch_envelope(X, A);
    CHECK(env.size() == 4);
    CHECK(env == brute_force_envelope(X, A));
    CHECK(ch_envelope(X, {{1, 1}}) == PointSet{{1, 1}});
    CHECK(is_hereditary(X, env));
    CHECK(is_concave(X, env));
    CHECK_FALSE(is_concave(X, down_closure(X, A)));
    ForestProduct X3{{Forest({-1}), Forest({-1}), Forest({-1})}};
    CHECK_THROWS_AS(ch_envelope(X3, {}), Error);
}

TEST_CASE("two-factor recipe matches brute force on random forests") {
    auto rep = random_envelope_trials(1000, 20240601);
    CHECK(rep.trials == 1000);
    CHECK(rep.mismatches == 0);
    CHECK(rep.nontrivial > 50);
}

TEST_CASE("three-factor counterexamples") {
    auto rep = ch_counterexamples();
    CHECK(rep.ex1_A1_size == 4);
    CHECK(rep.ex1_w_in_envelope);
    CHECK_FALSE(rep.ex1_w_dominated);
    CHECK_FALSE(rep.recipe_sufficient);
    CHECK(rep.ex2_union_of_downsets);
    CHECK(rep.ex2_disjoint);
    CHECK(rep.ex2_bound_strict);
    CHECK(rep.ok);
}
