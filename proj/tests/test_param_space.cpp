#include <cmath>

#include "doctest.h"
#include "horseshoe/errors.hpp"
#include "horseshoe/param_space.hpp"

using namespace hs;

TEST_CASE("interval tree scales and candidates") {
    auto T = interval_tree(1e-4, 0.25, 6);
    CHECK(T.levels[0].candidates == 10);
    CHECK(T.levels[1].eps == doctest::Approx(1e-5).epsilon(1e-12));
    CHECK(T.warnings.empty());
    for (int k = 0; k <= 6; ++k) {
        double expect = std::pow(1.25, k) * std::log(1e-4);
        CHECK(std::abs(std::log(T.levels[k].eps) - expect) <= 1e-10 * std::abs(expect));
        CHECK(T.levels[k].candidates == static_cast<long>(std::floor(std::exp(-0.25 * expect) * (1 + 1e-12))));
    }
    for (int k = 0; k < 6; ++k) {
        CHECK(std::abs(T.levels[k + 1].eps / std::pow(T.levels[k].eps, 1.25) - 1.0) < 1e-12);
        CHECK(T.levels[k].discarded >= 0.0);
        CHECK(T.levels[k].discarded < T.levels[k + 1].eps);
    }
    CHECK(T.level_discarded(1) < T.levels[1].eps);
    auto r = T.root();
    CHECK(r.lo == 1e-4);
    CHECK(r.hi == 2e-4);
    auto kids = T.children(r);
    CHECK(kids.size() == 10);
    CHECK(kids[3].lo == doctest::Approx(1e-4 + 3e-5).epsilon(1e-12));
    for (const auto& c : kids) CHECK(r.contains(c));
    auto leaf = T.follow({2, 5, 1});
    CHECK(leaf.level == 3);
    CHECK(leaf.path == std::vector<long>{2, 5, 1});
}

TEST_CASE("too few candidates") {
    auto T = interval_tree(0.01, 0.1, 1);
    CHECK(T.levels[0].candidates == 1);
    REQUIRE_FALSE(T.warnings.empty());
    try {
        interval_tree(0.01, 0.1, 1, true);
        FAIL("expected TooFewCandidates");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooFewCandidates);
    }
}

TEST_CASE("(H4) arithmetic") {
    CHECK(check_H4(0.55, 0.55));
    CHECK_FALSE(check_H4(0.7, 0.7));
    CHECK(check_H4(0.5, 0.5));
}

TEST_CASE("exponent set at (0.55, 0.55)") {
    auto e = exponents(0.55, 0.55);
    CHECK(e.rho0 == doctest::Approx(0.55).epsilon(1e-14));
    CHECK(e.rho1 == doctest::Approx(0.325).epsilon(1e-14));
    CHECK(e.sigma0 == doctest::Approx(0.45).epsilon(1e-14));
    CHECK(e.sigma1 == 0.0);
    CHECK(std::abs(e.beta_max - 1.38462) < 1e-5);
    CHECK(std::abs(e.xcr_exponent - 2.0) < 1e-12);
    CHECK(std::abs(e.exceptional_bound - 0.06667) < 1e-5);
    CHECK(std::abs(e.barx_exponent - e.beta_max) < 1e-12);
    CHECK(e.critical_exponent == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(e.rho0p == doctest::Approx(e.rho0 * 0.55 / 0.55));
    try {
        exponents(0.5, 0.6);
        FAIL("expected ConventionViolated");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::ConventionViolated);
    }
}

TEST_CASE("exponent identities over the (H4) region") {
    int checked = 0;
    for (int i = 1; i < 50; ++i)
        for (int j = 1; j <= i; ++j) {
            double ds = i / 50.0, du = j / 50.0;
            if (ds + du <= 1.0) continue;
            auto e = exponents(ds, du);
            CHECK(std::abs(e.xcr_identity) < 1e-12);
            CHECK(std::abs(e.barx_identity) < 1e-12);
            CHECK(std::abs(e.gap_identity) < 1e-12);
            CHECK(std::abs(e.critical_identity) < 1e-12);
            CHECK(std::abs(e.primed_identity) < 1e-12);
            CHECK(std::abs(e.rho1p - du / ds * e.rho1) < 1e-15);
            ++checked;
        }
    CHECK(checked > 100);
}

TEST_CASE("beta_max > 1 iff (H4) on a 50 x 50 grid") {
    int mismatches = 0, cells = 0;
    for (const auto& c : h4_region(50)) {
        if (!c.bifurcation) continue;
        ++cells;
        if ((c.beta_max > 1.0) != c.h4) ++mismatches;
    }
    CHECK(cells > 1000);
    CHECK(mismatches == 0);
}

TEST_CASE("bicritical budget") {
    auto e = exponents(0.6, 0.55);
    double eps0 = 1e-4, Pu = 5e-4, Ia = 1e-5, Iw = 3e-6;
    auto at = bicritical_budget(1.0, Ia, Iw, eps0, Pu, e);
    auto cr = bicritical_budget(at.x_cr, Ia, Iw, eps0, Pu, e);
    CHECK(cr.B0 == doctest::Approx(cr.B1).epsilon(1e-10));
    CHECK(cr.B0 == doctest::Approx(cr.B_cr).epsilon(1e-10));
    // Equal intervals: B_cr exponent.
    auto eq = bicritical_budget(1.0, Ia, Ia, eps0, Pu, e);
    CHECK(std::log(eq.B_cr) / std::log(Ia / eps0) == doctest::Approx(e.critical_exponent).epsilon(1e-10));
    // Monotone in x and regime switch.
    auto sweep = budget_sweep(10, 60, Ia, Iw, eps0, Pu, e);
    for (std::size_t k = 1; k < sweep.size(); ++k) CHECK(sweep[k].b.B >= sweep[k - 1].b.B);
    for (const auto& s : sweep) CHECK(s.b.regime0 == (s.x <= s.b.x_cr));
    auto beyond = bicritical_budget(2.0 * at.x_bar, Ia, Iw, eps0, Pu, e);
    CHECK(beyond.B < 1.0);
    CHECK(h4_region_csv(3).rfind("d_s0,d_u0,bifurcation,h4,beta_max\n", 0) == 0);
}
