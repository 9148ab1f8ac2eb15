#include <cmath>
#include <vector>

#include "doctest.h"
#include "horseshoe/chebyshev.hpp"
#include "horseshoe/fitting.hpp"

using namespace hs;

namespace {

std::vector<std::vector<double>> grid_samples(const Rect& r, int n, double (*f)(double, double)) {
    auto s = lobatto_nodes(n);
    std::vector<std::vector<double>> g(n + 1, std::vector<double>(n + 1));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) g[i][j] = f(from_unit(r.y, s[i]), from_unit(r.x, s[j]));
    return g;
}

}  // namespace

TEST_CASE("constant samples give a constant field") {
    Rect r;
    auto rep = fit_field(r, grid_samples(r, 4, [](double, double) { return 1.0; }), 4, 4);
    CHECK_FALSE(rep.degree_too_low);
    for (double y : {-1.0, -0.3, 0.7})
        for (double x : {-0.9, 0.0, 1.0}) {
            Jet2 j = rep.field.jet(y, x);
            CHECK(j.v == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(std::abs(j.x) < 1e-13);
            CHECK(std::abs(j.y) < 1e-13);
            CHECK(std::abs(j.xx) < 1e-12);
        }
}

TEST_CASE("linear samples give exact derivatives") {
    Rect r;
    auto rep = fit_field(r, grid_samples(r, 2, [](double, double x) { return 0.3 * x; }), 2, 2);
    for (double y : {-1.0, 0.2, 0.9})
        for (double x : {-0.5, 0.5}) {
            Jet2 j = rep.field.jet(y, x);
            CHECK(j.x == doctest::Approx(0.3).epsilon(1e-14));
            CHECK(std::abs(j.y) < 1e-14);
        }
}

TEST_CASE("smooth field fits to 1e-10 at degree 16") {
    Rect r;
    auto f = [](double y, double x) { return std::sin(y) * std::cos(x); };
    auto rep = fit_field(r, grid_samples(r, 16, f), 16, 16);
    double worst = 0.0;
    for (int a = 0; a <= 100; ++a)
        for (int b = 0; b <= 100; ++b) {
            double y = -1.0 + 0.02 * a, x = -1.0 + 0.02 * b;
            worst = std::max(worst, std::abs(rep.field(y, x) - f(y, x)));
        }
    CHECK(worst < 1e-10);
}

TEST_CASE("too low degree is reported, not fatal") {
    Rect r;
    auto rep = fit_field(r, grid_samples(r, 16, [](double y, double x) { return std::exp(3 * x * y); }), 2, 2);
    CHECK(rep.degree_too_low);
    CHECK(rep.tail > kFitTolerance);
}

TEST_CASE("spectral derivatives and jets agree") {
    Rect r{{-2.0, 1.0}, {0.5, 3.0}};
    auto f = ScalarField2::fit(r, 20, 20, [](double y, double x) { return std::sin(x + 0.5 * y) + y * y * x; });
    auto fx = f.dx(), fy = f.dy();
    Jet2 j = f.jet(-0.4, 1.7);
    CHECK(fx(-0.4, 1.7) == doctest::Approx(j.x).epsilon(1e-12));
    CHECK(fy(-0.4, 1.7) == doctest::Approx(j.y).epsilon(1e-12));
    CHECK(j.x == doctest::Approx(std::cos(1.7 - 0.2) + 0.16).epsilon(1e-10));
    CHECK(j.xy == doctest::Approx(-0.5 * std::sin(1.5) + 2 * -0.4).epsilon(1e-9));
}

TEST_CASE("sup norm of a smooth field") {
    Rect r;
    auto f = ScalarField2::fit(r, 24, 24, [](double y, double x) { return std::exp(-(x - 0.123) * (x - 0.123) - y * y); });
    CHECK(sup_abs(f) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("affine fields are exact and recognized") {
    Rect r{{-1.0, 2.0}, {0.0, 4.0}};
    auto f = ScalarField2::affine(r, 0.5, -0.2, 0.3);
    CHECK(f.is_affine());
    double c, cy, cx;
    f.affine_coeffs(c, cy, cx);
    CHECK(c == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(cy == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(cx == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(sup_abs(f) == doctest::Approx(std::abs(0.5 + 0.2 + 1.2)).epsilon(1e-15));
}

TEST_CASE("bundle fits share nodes and denoise affine data") {
    Rect r;
    auto b = fit_bundle(r, 2, [](double y, double x, double* o) {
        o[0] = 0.3 * x + 0.1 * y;
        o[1] = std::cos(x * y);
    }, 1e-13);
    CHECK(b.converged);
    CHECK(b.fields[0].is_affine());
    CHECK(b.fields[1](0.3, 0.4) == doctest::Approx(std::cos(0.12)).epsilon(1e-13));
}
