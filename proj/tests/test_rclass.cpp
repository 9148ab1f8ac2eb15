#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include "doctest.h"
#include "horseshoe/errors.hpp"
#include "horseshoe/parallel.hpp"
#include "horseshoe/rclass.hpp"

using namespace hs;

namespace {

const Rect kR0{{-1.0, 1.0}, {-2.0, 2.0}};
const Rect kR1{{-2.0, 2.0}, {-1.0, 1.0}};

ImplicitMap toy0() { return make_affine_map(kR0, 0, 0, 0.0, 0.0, 0.3, 0.0, 0.3, 0.0); }
ImplicitMap toy1() { return make_affine_map(kR1, 1, 1, 0.0, 0.0, 0.3, 0.0, 0.3, 0.0); }

ClassBudget floor_budget(double floor) {
    ClassBudget b;
    b.width_floor = floor;
    return b;
}

// Default family at floor 1e-8, extended once along candidate 0.
const RClass& level1_class() {
    static const RClass cls = [] {
        RClass c(make_family(), floor_budget(1e-8));
        c.extend(0, true);
        return c;
    }();
    return cls;
}

// Class restricted to a hand-picked set of pure words.
RClass fixture_class(const std::vector<std::string>& words, double floor) {
    nlohmann::json header{{"header",
                           {{"family", to_json(FamilyConfig{})},
                            {"budget", to_json(floor_budget(floor))},
                            {"tree_depth", 8},
                            {"path", std::vector<long>{}},
                            {"level", 0},
                            {"elements", words.size()},
                            {"budget_exhausted", false}}}};
    std::string text = header.dump() + "\n";
    for (const auto& w : words) text += nlohmann::json{{"word", w}, {"born", 0}, {"build", {{"kind", "pure"}}}}.dump() + "\n";
    return RClass::load_jsonl(text);
}

}  // namespace

TEST_CASE("itinerary words") {
    CHECK(word_length("0", 2) == 0);
    CHECK(word_length("0110", 2) == 3);
    CHECK(word_length("011+00", 2) == 2 + 1 + 2);
    CHECK(word_is_pure("0101"));
    CHECK_FALSE(word_is_pure("01+0"));
    CHECK(join_words("011", "10") == "0110");
    CHECK(parabolic_word("01", "00", -1) == "01-00");
    CHECK_THROWS_AS(join_words("01", "00"), Error);
    CHECK_THROWS_AS(class_budget_from_json({{"depth", 3}}), Error);
    auto b = class_budget_from_json({{"n_max", 12}, {"width_floor", 1e-6}});
    CHECK(b.n_max == 12);
    CHECK(class_budget_from_json(to_json(b)).width_floor == 1e-6);
}

TEST_CASE("initial class: full-shift counts and affine widths") {
    auto fam = make_family();
    ClassBudget b = floor_budget(1e-9);
    b.n_max = 6;
    RClass c(fam, b);
    std::map<int, int> per_n;
    for (int id : c.ids_at(0)) per_n[c.element(id).n]++;
    int total = 0;
    for (int n = 0; n <= 6; ++n) {
        CHECK(per_n[n] == (2 << n));
        total += per_n[n];
    }
    CHECK(static_cast<int>(c.size()) == total);
    for (int id : c.ids_at(0)) {
        const auto& e = c.element(id);
        CHECK(e.pure());
        CHECK(e.born == 0);
        CHECK(e.P == doctest::Approx(std::pow(fam.alpha(), e.n)).epsilon(1e-12));
        CHECK(e.Q == doctest::Approx(std::pow(fam.cfg.lambda_s, e.n)).epsilon(1e-12));
    }
    CHECK(c.find("0110") >= 0);
    CHECK(c.find("01+0") < 0);
}

TEST_CASE("initial class: count law for strips in one rectangle") {
    auto fam = make_family();
    RClass c(fam, floor_budget(1e-7));
    for (int k = 3; k <= 8; ++k) {
        double eps = std::pow(fam.cfg.lambda_s, k);
        int count = 0;
        for (int id : c.ids_at(0)) {
            const auto& e = c.element(id);
            if (e.src == 0 && e.n >= 1 && e.P >= eps * (1.0 - 1e-12)) ++count;
        }
        // Exact enumeration: words 0 a_1 .. a_n with 1 <= n <= k.
        int oracle = 0;
        for (int n = 1; n <= k; ++n) oracle += 1 << n;
        CHECK(count == oracle);
        double ratio = count / std::pow(eps, -fam.d_s0);
        CHECK(ratio >= 0.25);
        CHECK(ratio <= 4.0);
    }
}

TEST_CASE("base transversality on the linear toy") {
    FoldMap G{FoldConfig{}, 1.0};
    const double eta = 0.05;
    auto be = base_eval(toy0(), toy1(), G, Interval{1.0, 1.5}, eta);
    CHECK(be.T1);
    CHECK(be.T2);
    CHECK(be.T3);
    CHECK(be.dLR_lo == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(base_transversality(toy0(), toy1(), G, Interval{1.0, 1.5}, eta));
    CHECK(relation_of_maps(toy0(), toy1(), G, Interval{1.0, 1.5}, eta) == Relation::Transverse);
    // 1.6 < 2 * 0.9.
    auto wide = base_eval(toy0(), toy1(), G, Interval{1.0, 1.9}, eta);
    CHECK_FALSE(wide.T1);
    CHECK_FALSE(base_transversality(toy0(), toy1(), G, Interval{1.0, 1.9}, eta));
    CHECK(relation_of_maps(toy0(), toy1(), G, Interval{1.0, 1.9}, eta) == Relation::CriticallyRelated);
    // delta_LR = 1.6 + (t - 1) = -0.2 at t = -0.8.
    auto sep = base_eval(toy0(), toy1(), G, Interval{-1.0, -0.8}, eta);
    CHECK(sep.separated);
    CHECK(sep.dLR_hi == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK_FALSE(sep.ok());
    CHECK(relation_of_maps(toy0(), toy1(), G, Interval{-1.0, -0.8}, eta) == Relation::Separated);
}

TEST_CASE("transversality closure: hereditary pairs") {
    const RClass& c = level1_class();
    const int lv = 1;
    int q = c.find("00111111111"), p = c.find("000000000111");
    REQUIRE(q >= 0);
    REQUIRE(p >= 0);
    CHECK_FALSE(c.base(q, p, lv).ok());
    CHECK(c.transverse(q, p, lv));
    CHECK(c.transversality(q, p, lv) == Relation::Transverse);
    // Oracle: some stored ancestor triple satisfies the base relation.
    bool found = false;
    for (int qt = q; qt >= 0 && c.in_Qu(qt); qt = c.element(qt).q_parent)
        for (int pt = p; pt >= 0 && c.in_Ps(pt); pt = c.element(pt).p_parent)
            for (int l = 0; l <= lv; ++l)
                if (c.base(qt, pt, l).ok()) found = true;
    CHECK(found);
    // Nothing is transverse over I0.
    CHECK_FALSE(c.transverse(q, p, 0));
}

TEST_CASE("transversality algebra: heredity and concavity") {
    const RClass& c = level1_class();
    auto rep = transversality_algebra(c, 1, 11, 500);
    CHECK(rep.heredity_checked > 100);
    CHECK(rep.heredity_failures == 0);
    CHECK(rep.concavity_checked > 1000);
    CHECK(rep.concavity_failures == 0);
}

TEST_CASE("extension without admissible pairs keeps pure cylinders only") {
    FamilyConfig cfg;
    cfg.eps0 = 1e-12;
    RClass c(make_family(cfg), floor_budget(1e-8));
    std::size_t before = c.size();
    auto rep = c.extend(0, true);
    CHECK(rep.transverse_pairs == 0);
    CHECK(rep.added_parabolic == 0);
    CHECK(rep.added_simple == 0);
    CHECK(c.size() == before);
    for (int id : c.ids_at(1)) CHECK(c.element(id).pure());
}

TEST_CASE("one transverse pair adds both parabolic branches") {
    const std::string q0 = "0111111111", p1 = "0000000000";
    auto c = fixture_class({"0", "1", "00", "01", "10", "11", q0, p1, "01111111110", "01111111111"}, 5e-9);
    REQUIRE(c.size() == 10);
    auto rep = c.extend(0, true);
    CHECK(rep.added_parabolic == 2);
    CHECK(rep.added_simple == 0);
    CHECK(rep.compose_failures == 0);
    REQUIRE(c.size() == 12);
    int iq = c.find(q0), ip = c.find(p1);
    CHECK(c.transverse(iq, ip, 1));
    const int N0 = c.family().cfg.n0;
    for (int sign : {+1, -1}) {
        int id = c.find(parabolic_word(q0, p1, sign));
        REQUIRE(id >= 0);
        const auto& e = c.element(id);
        CHECK(e.kind == Element::Kind::Parabolic);
        CHECK(e.n == 9 + 9 + N0);
        CHECK(e.born == 1);
        CHECK(e.p_parent == iq);
        CHECK(e.q_parent == ip);
        CHECK(e.P >= 5e-9);
        CHECK(e.prime);
        CHECK(c.prime_decompose(id) == std::vector<int>{id});
    }
    auto kids = c.children(iq);
    CHECK(kids.simple.size() == 2);
    REQUIRE(kids.non_simple.size() == 2);
    for (const auto& ns : kids.non_simple) CHECK(ns.witness == p1);
    // The same class at I0 has no parabolic children.
    CHECK(c.children(iq, 0).non_simple.empty());
    // Closing again is a no-op.
    auto again = c.close();
    CHECK(again.added_parabolic == 0);
    CHECK(again.added_simple == 0);
    CHECK(c.size() == 12);
}

TEST_CASE("closure is idempotent on the default class") {
    RClass c(make_family(), floor_budget(1e-8));
    c.extend(0, true);
    auto d1 = c.dump_jsonl(false);
    auto rep = c.close();
    CHECK(rep.added_parabolic == 0);
    CHECK(rep.added_simple == 0);
    CHECK(c.dump_jsonl(false) == d1);
}

TEST_CASE("children and prime decomposition") {
    RClass pure(make_family(), floor_budget(1e-4));
    int id = pure.find("01");
    auto kids = pure.children(id);
    CHECK(kids.simple.size() == 2);
    CHECK(kids.non_simple.empty());
    int five = pure.find("010110");
    REQUIRE(five >= 0);
    auto f = pure.prime_decompose(five);
    REQUIRE(f.size() == 5);
    CHECK(pure.element(f[0]).word == "01");
    CHECK(pure.element(f[4]).word == "10");
    CHECK(pure.element(five).r == 5);
    CHECK(pure.prime_decompose(pure.find("10")) == std::vector<int>{pure.find("10")});

    const RClass& c = level1_class();
    int parabolic = 0;
    for (int e : c.ids_at(1)) {
        const auto& el = c.element(e);
        if (el.n == 0) continue;
        auto fs = c.prime_decompose(e);
        CHECK(static_cast<int>(fs.size()) == el.r);
        // Recomposing the factors gives the word back.
        std::string w = c.element(fs[0]).word;
        for (std::size_t k = 1; k < fs.size(); ++k) w = join_words(w, c.element(fs[k]).word);
        CHECK(w == el.word);
        for (int fct : fs) CHECK(c.element(fct).prime);
        if (el.kind != Element::Kind::Parabolic) continue;
        ++parabolic;
        auto ch = c.children(e);
        for (int s : ch.simple) CHECK(c.element(s).r == el.r + 1);
        for (const auto& ns : ch.non_simple) CHECK(c.element(ns.id).r <= el.r);
    }
    CHECK(parabolic > 0);
    for (int e : c.ids_at(1)) {
        const auto& el = c.element(e);
        if (!el.pure() || el.n == 0) continue;
        auto ch = c.children(e);
        for (int s : ch.simple) CHECK(c.element(s).r == el.r + 1);
        for (const auto& ns : ch.non_simple) CHECK(c.element(ns.id).r <= el.r);
    }
}

TEST_CASE("children counting bound") {
    const RClass& c = level1_class();
    const double eps = 0.01, eta = 0.05, beta = c.family().cfg.beta;
    const double cp = 2.0 * beta / (beta - 1.0);
    const double bound = std::pow(eps, -cp * eta);
    std::size_t worst = 0;
    for (int id : c.ids_at(1)) {
        const auto& e = c.element(id);
        if (e.n == 0 || e.P < 1e-4) continue;
        std::size_t count = 0;
        std::function<void(int)> walk = [&](int x) {
            for (int k : c.p_children(x, 1)) {
                if (c.element(k).P < eps * e.P) continue;
                ++count;
                walk(k);
            }
        };
        walk(id);
        worst = std::max(worst, count);
    }
    CHECK(worst > 0);
    CHECK(static_cast<double>(worst) <= bound);
}

TEST_CASE("criticality verdicts") {
    const RClass& c = level1_class();
    // Q disjoint from Q_u.
    auto disjoint = c.classify(c.find("10"), Side::Q, 1);
    CHECK(disjoint.verdict == Criticality::Transverse);
    CHECK(disjoint.witness.empty());
    // Q containing Q_u.
    auto big = c.classify(c.find("111"), Side::Q, 1);
    CHECK(big.verdict == Criticality::Critical);
    CHECK(c.classify(c.find("000"), Side::P, 1).verdict == Criticality::Critical);
    // Deep failure: the search descends through Q-children of Q_u.
    int p1 = c.find("0000000000");
    auto deep = c.classify(p1, Side::P, 1);
    CHECK(deep.verdict == Criticality::Critical);
    REQUIRE(deep.witness.size() >= 2);
    CHECK(deep.witness.front() == c.special().Qu_word);
    for (std::size_t k = 1; k < deep.witness.size(); ++k) {
        auto kids = c.q_children(c.find(deep.witness[k - 1]), 1);
        bool child = false;
        for (int x : kids) child = child || c.element(x).word == deep.witness[k];
        CHECK(child);
    }
    int last = c.find(deep.witness.back());
    CHECK(c.transversality(last, p1, 1) == Relation::CriticallyRelated);
    auto flags = c.flags(p1, 1);
    CHECK(flags.P_critical);
}

TEST_CASE("regularity") {
    auto vac = regularity_check({}, 1e-4, 1.05);
    CHECK(vac.regular);
    CHECK(vac.bicritical == 0);
    const double len = 1e-4;
    auto fat = regularity_check({{"thin", 1e-9, 1e-9}, {"fat", std::pow(len, 0.9), std::pow(len, 0.9)}}, len, 1.2);
    CHECK_FALSE(fat.regular);
    CHECK(fat.witness == "fat");
    CHECK(fat.witness_P == doctest::Approx(std::pow(len, 0.9)));
    const RClass& c = level1_class();
    for (int lv = 0; lv <= 1; ++lv) {
        auto r = c.regularity(lv, c.family().cfg.beta);
        CHECK(r.regular);
        CHECK(r.threshold == doctest::Approx(std::pow(c.interval(lv).length(), c.family().cfg.beta)));
    }
}

TEST_CASE("class invariants along the path") {
    const RClass& c = level1_class();
    // Monotonicity: R(I0) words all survive in R(I1).
    std::set<std::string> w1;
    for (int id : c.ids_at(1)) w1.insert(c.element(id).word);
    for (int id : c.ids_at(0)) CHECK(w1.count(c.element(id).word) == 1);
    auto law = stretched_exponential(c);
    CHECK(law.gamma == doctest::Approx(0.584963).epsilon(1e-6));
    CHECK(law.C <= 100.0);
    for (int id : c.ids_at(1)) {
        const auto& e = c.element(id);
        if (e.n == 0) continue;
        CHECK(e.P <= law.C * std::exp(-std::pow(e.n, law.gamma)) * (1.0 + 1e-12));
        if (e.pure()) continue;
        auto m = c.map(id);
        CHECK(check_cone(*m, {2.0, 1.0, 1.0}).ok);
        CHECK(distortion(*m) < 10.0);
    }
}

TEST_CASE("budget exhaustion is reported") {
    ClassBudget b = floor_budget(1e-8);
    b.max_elements = 100;
    RClass c(make_family(), b);
    CHECK(c.last_budget_exhausted());
    CHECK(c.size() <= 100);
}

TEST_CASE("dump, load and truncate") {
    const RClass& c = level1_class();
    auto text = c.dump_jsonl(false);
    auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
    CHECK(first.at("header").at("level") == 1);
    auto loaded = RClass::load_jsonl(text);
    CHECK(loaded.size() == c.size());
    CHECK(loaded.level() == 1);
    CHECK(loaded.dump_jsonl(false) == text);
    auto line = c.element_json(c.find("0111111111+0000000000"), true);
    CHECK(line.at("n") == 20);
    CHECK(line.at("parent_word") == "0111111111");
    CHECK(line.at("build").at("kind") == "parabolic");
    CHECK(line.at("flags").contains("bicritical"));
    RClass t = c;
    t.extend(0, true);
    CHECK(t.level() == 2);
    t.truncate(1);
    CHECK(t.dump_jsonl(false) == text);
    CHECK_THROWS_AS(RClass::load_jsonl(""), Error);
}

TEST_CASE("class is identical for any worker count") {
    std::string ref;
    for (int w : {1, 4, 8}) {
        set_worker_count(w);
        RClass c(make_family(), floor_budget(1e-8));
        c.extend(0, true);
        auto d = c.dump_jsonl(false);
        if (ref.empty()) ref = d;
        CHECK(d == ref);
    }
    set_worker_count(0);
}
