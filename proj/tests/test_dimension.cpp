#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>

#include "doctest.h"
#include "horseshoe/dimension.hpp"
#include "horseshoe/errors.hpp"
#include "horseshoe/parallel.hpp"

using namespace hs;

namespace {

std::optional<ErrorCode> error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

FamilyConfig third_config() {
    FamilyConfig c;
    c.lambda_s = 1.0 / 3.0;
    c.lambda_u = 3.0;
    return c;
}

const RClass& third_class() {
    static const RClass cls(make_family(third_config()));
    return cls;
}

const RClass& default_class() {
    static const RClass cls(make_family());
    return cls;
}

ClassBudget floor_budget(double floor) {
    ClassBudget b;
    b.width_floor = floor;
    return b;
}

const RClass& perturbed_class() {
    static const RClass cls = [] {
        FamilyConfig c;
        c.nonlinearity = 0.01;
        return RClass(make_family(c), floor_budget(1e-8));
    }();
    return cls;
}

// Default family at floor 1e-8 with one transverse descent: parabolic primes present.
const RClass& parabolic_class() {
    static const RClass cls = [] {
        RClass c(make_family(), floor_budget(1e-8));
        c.extend(0, true);
        return c;
    }();
    return cls;
}

Truncation depth(int m) {
    Truncation t;
    t.m_trunc = m;
    return t;
}

}  // namespace

TEST_CASE("dilatation of affine primes") {
    const RClass& cls = default_class();
    const double b0 = std::log(1.0 / 0.284);
    std::vector<int> primes;
    for (int id : cls.ids_at(0)) {
        const auto& e = cls.element(id);
        if (!e.prime || e.n < 1) continue;
        primes.push_back(id);
        CHECK(dilatation(cls, id, stable_curve_proxy(cls, e.dst)) == doctest::Approx(b0).epsilon(1e-12));
        CHECK(dilatation(cls, id) == doctest::Approx(b0).epsilon(1e-12));
    }
    CHECK(primes.size() == 4);
    // Chain 0 -> 1 -> 1 -> 0 -> 0 of four trivial primes.
    std::vector<int> chain{cls.find("01"), cls.find("11"), cls.find("10"), cls.find("00")};
    CHECK(birkhoff_sum(cls, chain) == doctest::Approx(4 * b0).epsilon(1e-12));
    const auto& proxy = cls.element(stable_curve_proxy(cls, 0));
    CHECK(proxy.word == std::string(proxy.word.size(), '0'));
    CHECK(cls.find(proxy.word + "0") < 0);
}

TEST_CASE("dilatation tracks widths on the perturbed model") {
    const RClass& cls = perturbed_class();
    double worst = 0.0;
    for (int id : cls.ids_at(0)) {
        const auto& e = cls.element(id);
        if (!e.prime || e.n < 1) continue;
        worst = std::max(worst, std::abs(dilatation(cls, id, stable_curve_proxy(cls, e.dst)) + std::log(e.P)));
    }
    CHECK(worst > 0.0);
    CHECK(worst <= 0.5);
}

TEST_CASE("transfer operator closed forms") {
    const RClass& cls = third_class();
    TransferOperator one(cls, depth(1));
    CHECK(one.leaves().size() == 4);
    auto sp = one.spectrum(0.5);
    CHECK(sp.converged);
    CHECK(sp.lambda == doctest::Approx(2.0 * std::pow(3.0, -0.5)).epsilon(1e-12));
    const double d0 = std::log(2.0) / std::log(3.0);
    CHECK(std::abs(one.spectrum(d0).lambda - 1.0) < 1e-12);
    TransferOperator deep(cls);
    CHECK(deep.leaves().size() == 512);
    CHECK(std::abs(deep.spectrum(d0).lambda - 1.0) < 1e-12);
    for (double h : sp.h) CHECK(h > 0.0);
    for (double v : sp.nu) CHECK(v > 0.0);
}

TEST_CASE("power iteration agrees with a dense eigensolver") {
    TransferOperator op(perturbed_class(), depth(4));
    const double d = 0.6;
    auto M = op.dense(d);
    const Eigen::Index L = static_cast<Eigen::Index>(M.size());
    Eigen::MatrixXd A(L, L);
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = 0; j < L; ++j) A(i, j) = M[i][j];
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    Eigen::Index k = 0;
    es.eigenvalues().cwiseAbs().maxCoeff(&k);
    const double lam = es.eigenvalues()(k).real();
    Eigen::VectorXd v = es.eigenvectors().col(k).real();
    v /= v.sum();
    auto sp = op.spectrum(d);
    CHECK(sp.lambda == doctest::Approx(lam).epsilon(1e-10));
    for (Eigen::Index i = 0; i < L; ++i) CHECK(sp.nu[i] == doctest::Approx(v(i)).epsilon(1e-8));
}

TEST_CASE("dimension of affine two-branch models") {
    auto r3 = solve_dimension(third_class());
    CHECK(std::abs(r3.d_s - std::log(2.0) / std::log(3.0)) < 1e-6);
    CHECK(std::abs(r3.lambda - 1.0) < 1e-10);
    CHECK(r3.monotone);
    CHECK(r3.lambda_curve.size() == 20);
    for (std::size_t i = 1; i < r3.lambda_curve.size(); ++i)
        CHECK(r3.lambda_curve[i].second < r3.lambda_curve[i - 1].second);
    CHECK(r3.lambda_curve.back().second < 0.5);

    auto r = solve_dimension(default_class());
    CHECK(std::abs(r.d_s - std::log(2.0) / std::log(1.0 / 0.284)) < 1e-5);
    CHECK(r.monotone);
    CHECK(r.tail_mass == 0.0);
    CHECK(r.h_ratio <= 20.0);
}

TEST_CASE("dimension with parabolic primes") {
    const RClass& cls = parabolic_class();
    TransferOperator op(cls);
    bool parabolic_leaf = false;
    for (int s : op.leaves()) parabolic_leaf |= op.nodes()[s].word.find_first_of("+-") != std::string::npos;
    CHECK(parabolic_leaf);
    CHECK(op.tail_mass() <= 0.1);
    Truncation thin;
    thin.w_min = 2e-8;
    TransferOperator cut(cls, thin);
    CHECK(cut.excluded_primes() > 0);
    CHECK(cut.tail_mass() > 0.0);
    CHECK(cut.tail_mass() <= 0.1);

    auto r = solve_dimension(op);
    const double pure = solve_dimension(cls, Truncation{}, -1, 0.05, 1.5, 0).d_s;
    const double box = box_counting_dimension(make_family(), 8);
    CHECK(r.d_s > pure);
    CHECK(std::abs(r.d_s - box) < 0.05);
    CHECK(r.d_s >= op.d_minus());
    CHECK(r.monotone);
    CHECK(r.lambda_curve.back().second < 0.5);
    CHECK(r.h_ratio <= 20.0);
    // Rooted at either base rectangle.
    auto r0 = solve_dimension(op, 0), r1 = solve_dimension(op, 1);
    CHECK(std::abs(r0.d_s - r1.d_s) < 1e-6);
    CHECK(std::abs(r0.d_s - r.d_s) < 1e-6);
}

TEST_CASE("perturbed model: eigenvector bounds and base point") {
    const RClass& cls = perturbed_class();
    auto r = solve_dimension(cls);
    CHECK(r.monotone);
    CHECK(r.h_ratio <= 20.0);
    CHECK(std::abs(r.d_s - cls.family().d_s0) < 0.01);
    for (int m : {6, 8}) {
        Truncation t = depth(m), q = depth(m);
        q.y_base = 0.25;
        CHECK(std::abs(solve_dimension(cls, t).d_s - solve_dimension(cls, q).d_s) < 1e-3);
    }
    auto r0 = solve_dimension(cls, Truncation{}, 0), r1 = solve_dimension(cls, Truncation{}, 1);
    CHECK(std::abs(r0.d_s - r1.d_s) < 1e-6);
}

TEST_CASE("truncation errors") {
    Truncation coarse;
    coarse.w_min = 0.5;
    CHECK(error_of([&] { TransferOperator op(default_class(), coarse); }) == ErrorCode::TruncationTooCoarse);
    CHECK(error_of([&] { solve_dimension(default_class(), Truncation{}, -1, 0.7, 1.5); }) == ErrorCode::BracketFailure);
    CHECK(error_of([&] { truncation_from_json({{"depth", 3}}); }) == ErrorCode::ConfigError);
    CHECK(error_of([&] { truncation_from_json({{"w_min", 2.0}}); }) == ErrorCode::ConfigError);
    Truncation t = truncation_from_json({{"m_trunc", 5}, {"w_min", 1e-6}});
    CHECK(t.m_trunc == 5);
    CHECK(to_json(truncation_from_json(to_json(t))) == to_json(t));
}

TEST_CASE("Gibbs measure") {
    SUBCASE("constant model") {
        TransferOperator op(third_class());
        const double d0 = std::log(2.0) / std::log(3.0);
        auto g = gibbs_measure(op, solve_dimension(op).d_s);
        CHECK(std::abs(g.gibbs_constant - 1.0) < 1e-10);
        CHECK(g.additivity_error < 1e-12);
        std::vector<double> per_depth(9, 0.0);
        for (const auto& c : g.cylinders) {
            CHECK(c.mu == doctest::Approx(std::pow(2.0, -c.depth)).epsilon(1e-10));
            CHECK(std::pow(c.width, d0) == doctest::Approx(std::pow(2.0, -c.depth)).epsilon(1e-8));
            if (c.depth > 0) per_depth[c.depth] += c.mu;
        }
        for (int k = 1; k <= 8; ++k) CHECK(per_depth[k] == doctest::Approx(2.0).epsilon(1e-12));
        auto csv = gibbs_csv(g);
        CHECK(csv.rfind("word,depth,rectangle,width,mu\n", 0) == 0);
    }
    SUBCASE("perturbed model") {
        TransferOperator op(perturbed_class());
        auto g = gibbs_measure(op, solve_dimension(op).d_s);
        CHECK(g.gibbs_constant > 1.0);
        CHECK(g.gibbs_constant <= 10.0);
        CHECK(g.additivity_error < 1e-12);
    }
    SUBCASE("parabolic class") {
        TransferOperator op(parabolic_class());
        auto g = gibbs_measure(op, solve_dimension(op).d_s);
        CHECK(g.gibbs_constant <= 10.0);
        CHECK(g.additivity_error < 1e-12);
    }
}

TEST_CASE("theta series below a base rectangle") {
    const RClass& cls = default_class();
    const int root = cls.find("0");
    const double lam = 0.284;
    SUBCASE("s = 1 is geometric") {
        auto th = theta_series(cls, root, 1.0, 10);
        double partial = 0.0;
        for (int k = 0; k <= 10; ++k) {
            partial += std::pow(2.0 * lam, k);
            CHECK(th.partial[k] == doctest::Approx(partial).epsilon(1e-12));
        }
        CHECK(th.sum == doctest::Approx(partial).epsilon(1e-12));
        CHECK(th.converges);
    }
    SUBCASE("s = d_s0 grows linearly") {
        const double d0 = cls.family().d_s0;
        auto th = theta_series(cls, root, d0, 12);
        for (int k = 0; k <= 12; ++k) CHECK(th.partial[k] == doctest::Approx(k + 1.0).epsilon(1e-10));
        CHECK(th.ratio == doctest::Approx(1.0).epsilon(1e-10));
        CHECK_FALSE(th.converges);
    }
    SUBCASE("s = d_s0 + 0.1 converges") {
        const double s = cls.family().d_s0 + 0.1;
        auto th = theta_series(cls, root, s, 40);
        const double q = 2.0 * std::pow(lam, s);
        CHECK(th.converges);
        CHECK(th.ratio == doctest::Approx(q).epsilon(1e-10));
        CHECK(th.tail == doctest::Approx(std::pow(q, 41) / (1.0 - q)).epsilon(1e-8));
        CHECK(th.tail > 1e-3);
    }
}

TEST_CASE("weighted children sums") {
    const RClass& cls = default_class();
    const double kappa = 0.9, dm = 0.54, lam = 0.284;
    const int id = cls.find("01");
    auto w1 = weighted_children_sum(cls, id, kappa, dm, 1);
    CHECK(w1.count == 2);
    CHECK(w1.ratio == doctest::Approx(2.0 * kappa * std::pow(lam, dm)).epsilon(1e-12));
    CHECK(w1.ratio == doctest::Approx(0.91).epsilon(0.01));
    for (int m = 1; m <= 8; ++m) {
        auto w = weighted_children_sum(cls, id, kappa, dm, m);
        CHECK(w.ratio == doctest::Approx(std::pow(2.0 * kappa * std::pow(lam, dm), m)).epsilon(1e-10));
        CHECK(w.bound_ratio <= 3.0);
    }
    CHECK(error_of([&] { weighted_children_sum(cls, id, 1.5, dm, 1); }) == ErrorCode::ConfigError);

    const RClass& par = parabolic_class();
    int with_non_simple = -1;
    for (int x : par.ids_at(1))
        if (!par.children(x, 1).non_simple.empty()) {
            with_non_simple = x;
            break;
        }
    REQUIRE(with_non_simple >= 0);
    for (int m = 1; m <= 3; ++m) CHECK(weighted_children_sum(par, with_non_simple, kappa, dm, m).bound_ratio <= 10.0);
}

TEST_CASE("dimension is identical for any worker count") {
    std::string ref;
    for (int n : {1, 4, 8}) {
        set_worker_count(n);
        TransferOperator op(parabolic_class());
        auto r = solve_dimension(op);
        std::string out = to_json(r, Truncation{}).dump() + gibbs_csv(gibbs_measure(op, r.d_s));
        if (ref.empty()) ref = out;
        CHECK(out == ref);
    }
    set_worker_count(0);
}
