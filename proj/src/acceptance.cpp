#include "horseshoe/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "horseshoe/errors.hpp"
#include "horseshoe/fold_parabolic.hpp"
#include "horseshoe/forest.hpp"
#include "horseshoe/parallel.hpp"
#include "horseshoe/param_space.hpp"
#include "horseshoe/verify_suite.hpp"

namespace hs {

namespace {

using json = nlohmann::json;

VerifyOptions suite_options(const RunConfig& c) {
    VerifyOptions o;
    o.points = c.verify.points;
    o.seed = c.seed;
    o.corrupt = c.verify.corrupt;
    return o;
}

json flagged(const std::map<std::string, double>& per_formula, double threshold) {
    json out = json::array();
    for (const auto& [name, rel] : per_formula)
        if (!(rel < threshold)) out.push_back(name);
    return out;
}

ClassBudget floor_budget(double floor) {
    ClassBudget b;
    b.width_floor = floor;
    return b;
}

FamilyConfig perturbed_family(const FamilyConfig& base) {
    FamilyConfig f = base;
    f.nonlinearity = 0.01;
    return f;
}

// Criterion 1: composition derivative formulas against finite differences.
bool composition_calculus(const RunConfig& c, json& m) {
    auto opt = suite_options(c);
    auto s = run_simple_suite(c.verify.simple_pairs, c.seed, opt);
    auto p = run_parabolic_suite(c.verify.parabolic_instances, c.seed + 1, opt);
    m["simple_pairs"] = s.pairs;
    m["simple_evaluations"] = s.evaluations;
    m["simple_max_rel"] = s.max_rel;
    m["simple_formulas"] = s.per_formula.size();
    m["parabolic_instances"] = p.instances;
    m["parabolic_max_rel"] = p.max_rel;
    m["parabolic_formulas"] = p.per_formula.size();
    json bad = flagged(s.per_formula, 1e-5);
    for (const auto& f : flagged(p.per_formula, 1e-5)) bad.push_back(f);
    m["flagged"] = bad;
    return s.ok && p.ok && bad.empty() && s.pairs + p.instances >= 100;
}

// Criterion 2: cone upgrade and width multiplicativity.
bool cone_and_width(const RunConfig& c, json& m) {
    auto r = run_cone_suite(c.verify.cone_pairs, c.seed + 2);
    m["pairs"] = r.pairs;
    m["cone_pass"] = r.cone_pass;
    m["ratio_min"] = r.ratio_min;
    m["ratio_max"] = r.ratio_max;
    m["linear_ratio_err"] = r.linear_ratio_err;
    m["distortion_constant"] = r.distortion_constant;
    m["det_rel_err"] = r.det_rel_err;
    return r.cone_pass == r.pairs && r.ratio_min >= 0.1 && r.ratio_max <= 10.0 && r.linear_ratio_err <= 1e-10;
}

// Criterion 3: parabolic width constant on the linear toy, shape of C on model pairs.
bool parabolic_widths(const RunConfig& c, json& m) {
    const Rect r0{{-1.0, 1.0}, {-2.0, 2.0}}, r1{{-2.0, 2.0}, {-1.0, 1.0}};
    auto F0 = make_affine_map(r0, 0, 0, 0.0, 0.0, 0.3, 0.0, 0.3, 0.0);
    auto F1 = make_affine_map(r1, 1, 1, 0.0, 0.0, 0.3, 0.0, 0.3, 0.0);
    FoldMap G{FoldConfig{}, 1.0};
    auto pair = parabolic_compose(F0, G, F1);
    const double ratio = widths(pair.plus).P / (widths(F0).P * widths(F1).P / std::sqrt(pair.disp.delta));
    m["delta"] = pair.disp.delta;
    m["width_ratio"] = ratio;
    bool ok = std::abs(pair.disp.delta - 0.4) < 1e-12 && std::abs(ratio - 0.5) <= 1e-6;

    double cw = 0.0, cww = 0.0;
    int samples = 0;
    for (const auto& cfg : {c.family, perturbed_family(c.family)}) {
        auto fam = make_family(cfg);
        for (double t : {fam.t_range.lo, fam.t_range.mid(), fam.t_range.hi})
            for (int k = 1; k <= 4; ++k) {
                auto Q0 = pure_cylinder_map(fam, std::string(k + 1, '1'));
                auto P1 = pure_cylinder_map(fam, std::string(k + 1, '0'));
                auto sh = tangency_shape(make_jets(Q0, fam.fold_at(t), P1), Rect{Q0.rect.y, P1.rect.x},
                                         Interval{-1.0, 1.0});
                cw = std::max(cw, sh.cw_dev);
                cww = std::max(cww, sh.cww_dev);
                samples += sh.samples;
            }
    }
    m["model_cw_dev"] = cw;
    m["model_cww_dev"] = cww;
    m["model_samples"] = samples;
    VerifyOptions o;
    o.points = 1;
    auto rs = run_parabolic_suite(4, c.seed + 3, o);
    m["random_suite_cw_dev"] = rs.cw_dev;
    m["random_suite_cww_dev"] = rs.cww_dev;
    return ok && cw < 0.05 && cww < 0.05;
}

// Criterion 4: dimension oracle, monotone lambda, Gibbs constants.
bool dimension_oracle(const RunConfig& c, json& m) {
    FamilyConfig third = c.family;
    third.lambda_s = 1.0 / 3.0;
    third.lambda_u = 3.0;
    third.nonlinearity = 0.0;
    RClass cls(make_family(third), c.budget);
    TransferOperator op(cls, c.truncation);
    auto r = solve_dimension(op);
    auto g = gibbs_measure(op, r.d_s);
    const double oracle = std::log(2.0) / std::log(3.0);
    bool strict = true;
    for (std::size_t i = 1; i < r.lambda_curve.size(); ++i)
        strict = strict && r.lambda_curve[i].second < r.lambda_curve[i - 1].second;
    RClass pc(make_family(perturbed_family(c.family)), floor_budget(std::max(c.budget.width_floor, 1e-8)));
    TransferOperator pop(pc, c.truncation);
    auto pg = gibbs_measure(pop, solve_dimension(pop).d_s);
    m["d_s"] = r.d_s;
    m["oracle"] = oracle;
    m["grid_points"] = r.lambda_curve.size();
    m["strictly_decreasing"] = strict;
    m["gibbs_constant"] = g.gibbs_constant;
    m["perturbed_gibbs_constant"] = pg.gibbs_constant;
    m["perturbed_states"] = pop.leaves().size();
    return std::abs(r.d_s - oracle) < 1e-6 && strict && r.lambda_curve.size() == 20 &&
           std::abs(g.gibbs_constant - 1.0) <= 1e-10 && pg.gibbs_constant <= 10.0;
}

// Criterion 5: stretched-exponential width law on the extended class.
bool width_law(const RunConfig& c, json& m) {
    RClass cls(make_family(c.family), c.budget, c.tree_depth);
    cls.extend(0, true);
    auto law = stretched_exponential(cls);
    std::size_t parabolic = 0;
    for (int id : cls.ids_at(cls.level())) parabolic += cls.element(id).kind == Element::Kind::Parabolic;
    m["elements"] = cls.ids_at(cls.level()).size();
    m["parabolic"] = parabolic;
    m["gamma"] = law.gamma;
    m["C"] = law.C;
    m["worst"] = law.worst;
    return std::abs(law.gamma - std::log(1.5) / std::log(2.0)) < 1e-12 && law.C <= 100.0;
}

// Criterion 6: exhaustive heredity and concavity, forest envelopes.
bool transversality_and_forests(const RunConfig& c, json& m) {
    bool ok = true;
    json classes = json::array();
    for (const auto& cfg : {c.family, perturbed_family(c.family)}) {
        RClass cls(make_family(cfg), floor_budget(std::max(c.budget.width_floor, 1e-8)), c.tree_depth);
        cls.extend(0, true);
        auto r = transversality_algebra(cls, cls.level(), c.seed, 0);
        classes.push_back({{"nonlinearity", cfg.nonlinearity},
                           {"heredity_checked", r.heredity_checked},
                           {"heredity_failures", r.heredity_failures},
                           {"concavity_checked", r.concavity_checked},
                           {"concavity_failures", r.concavity_failures}});
        ok = ok && r.heredity_failures == 0 && r.concavity_failures == 0 && r.heredity_checked > 0 &&
             r.concavity_checked > 0;
    }
    m["classes"] = classes;
    auto env = random_envelope_trials(1000, c.seed);
    m["envelope_trials"] = env.trials;
    m["envelope_mismatches"] = env.mismatches;
    auto ce = ch_counterexamples();
    m["recipe_counterexample"] = ce.ex1_w_in_envelope && !ce.ex1_w_dominated && !ce.recipe_sufficient;
    m["union_counterexample"] = ce.ex2_union_of_downsets && ce.ex2_disjoint && ce.ex2_bound_strict;
    return ok && env.trials == 1000 && env.mismatches == 0 && ce.ok;
}

// Criterion 7: exponent calculus at (0.55, 0.55) and the (H4) grid.
bool exponent_calculus(const RunConfig&, json& m) {
    auto e = exponents(0.55, 0.55);
    int cells = 0, mismatches = 0;
    for (const auto& cell : h4_region(50)) {
        if (!cell.bifurcation) continue;
        ++cells;
        mismatches += (cell.beta_max > 1.0) != cell.h4;
    }
    m["beta_max"] = e.beta_max;
    m["xcr_exponent"] = e.xcr_exponent;
    m["exceptional_bound"] = e.exceptional_bound;
    m["barx_identity"] = e.barx_identity;
    m["grid_cells"] = cells;
    m["grid_mismatches"] = mismatches;
    return std::abs(e.beta_max - 1.38462) < 1e-5 && std::abs(e.xcr_exponent - 2.0) < 1e-12 &&
           std::abs(e.exceptional_bound - 0.06667) < 1e-5 && mismatches == 0 && cells > 0 &&
           std::abs((e.sigma0 + e.sigma1) / e.rho1 - e.beta_max) < 1e-12;
}

// Criterion 8: beta-regularity of the root class.
bool root_regularity(const RunConfig& c, json& m) {
    RClass cls(make_family(c.family), c.budget, c.tree_depth);
    auto r = cls.regularity(0, 1.05);
    m["regular"] = r.regular;
    m["bicritical"] = r.bicritical;
    m["undetermined"] = r.undetermined;
    m["threshold"] = r.threshold;
    m["witness"] = r.witness;
    return r.regular;
}

// Criterion 9: parameter scale tree.
bool parameter_tree(const RunConfig&, json& m) {
    auto T = interval_tree(1e-4, 0.25, 6);
    double worst = 0.0;
    for (int k = 0; k <= 6; ++k) {
        double expect = std::pow(1.25, k) * std::log(1e-4);
        worst = std::max(worst, std::abs(std::log(T.levels[k].eps) - expect) / std::abs(expect));
    }
    m["candidates_level0"] = T.levels[0].candidates;
    m["log_eps_rel_err"] = worst;
    return T.levels[0].candidates == 10 && worst <= 1e-10;
}

// Criterion 10: byte-identical build and dimension output.
bool determinism(const RunConfig& c, json& m) {
    RunConfig rc = c;
    if (rc.path.empty()) rc.path = {0};
    std::string ref;
    int runs = 0, differing = 0;
    for (int workers : {1, 4, 8, 1}) {
        set_worker_count(workers);
        auto b = cmd_build(rc);
        RClass cls = build_class(rc);
        for (long i : rc.path) cls.extend(i);
        std::string out = b.dump + b.geometry + b.summary.dump() + cmd_dimension(cls, rc).dump();
        if (ref.empty()) ref = out;
        differing += out != ref;
        ++runs;
    }
    set_worker_count(0);
    m["runs"] = runs;
    m["worker_counts"] = {1, 4, 8, 1};
    m["differing"] = differing;
    m["bytes"] = ref.size();
    return differing == 0;
}

struct Criterion {
    const char* name;
    std::function<bool(const RunConfig&, json&)> run;
    double time_limit;  // seconds, 0 for none
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list{
        {"composition calculus against finite differences", composition_calculus, 60.0},
        {"cone upgrade and width law", cone_and_width, 0.0},
        {"parabolic widths and tangency shape", parabolic_widths, 0.0},
        {"dimension oracle and Gibbs constants", dimension_oracle, 30.0},
        {"stretched-exponential widths", width_law, 0.0},
        {"transversality algebra and forest envelopes", transversality_and_forests, 0.0},
        {"exponent calculus", exponent_calculus, 0.0},
        {"regularity at the root", root_regularity, 0.0},
        {"parameter tree", parameter_tree, 0.0},
        {"determinism across runs and worker counts", determinism, 0.0},
    };
    return list;
}

}  // namespace

json to_json(const CriterionResult& r) {
    json j{{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"measured", r.measured}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

CriterionResult run_criterion(int id, const RunConfig& c) {
    const auto& list = criteria();
    if (id < 1 || id > static_cast<int>(list.size())) throw Error(ErrorCode::ConfigError, "no such criterion");
    const auto& cr = list[id - 1];
    CriterionResult r;
    r.id = id;
    r.name = cr.name;
    auto t0 = std::chrono::steady_clock::now();
    try {
        r.pass = cr.run(c, r.measured);
    } catch (const std::exception& e) {
        r.pass = false;
        r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.time_limit > 0.0) {
        r.measured["time_limit_s"] = cr.time_limit;
        r.measured["within_time_limit"] = r.seconds < cr.time_limit;
        r.pass = r.pass && r.seconds < cr.time_limit;
    }
    return r;
}

std::vector<CriterionResult> run_acceptance(const RunConfig& c, const std::vector<int>& ids) {
    std::vector<int> todo = ids;
    if (todo.empty())
        for (int i = 1; i <= static_cast<int>(criteria().size()); ++i) todo.push_back(i);
    std::vector<CriterionResult> out;
    for (int id : todo) out.push_back(run_criterion(id, c));
    return out;
}

json cmd_verify(const RunConfig& c, const std::vector<int>& ids) {
    auto results = run_acceptance(c, ids);
    json checks = json::array();
    json failures = json::array();
    for (const auto& r : results) {
        checks.push_back(to_json(r));
        if (!r.pass) failures.push_back(r.name);
    }
    return {{"schema", std::string("horseshoe/verify_report/") + kSchemaVersion},
            {"seed", c.seed},
            {"corrupt", c.verify.corrupt},
            {"checks", checks},
            {"failures", failures},
            {"ok", failures.empty()}};
}

}  // namespace hs
