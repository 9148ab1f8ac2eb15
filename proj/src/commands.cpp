#include "horseshoe/commands.hpp"

#include <cmath>
#include <sstream>

#include "horseshoe/errors.hpp"
#include "horseshoe/fold_parabolic.hpp"
#include "horseshoe/param_space.hpp"
#include "horseshoe/serialize.hpp"

namespace hs {

namespace {

nlohmann::json schema_tag(const std::string& name) { return std::string("horseshoe/") + name + "/" + kSchemaVersion; }

template <class T>
T get_checked(const nlohmann::json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, "bad value for " + key + ": " + e.what());
    }
}

nlohmann::json nan_as_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double null_as_nan(const nlohmann::json& j, const std::string& key) {
    if (j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
    return get_checked<double>(j, key);
}

nlohmann::json to_json(const ExtendReport& r) {
    return {{"level", r.level},
            {"added_simple", r.added_simple},
            {"added_parabolic", r.added_parabolic},
            {"transverse_pairs", r.transverse_pairs},
            {"pairs_examined", r.pairs_examined},
            {"compose_failures", r.compose_failures},
            {"sweeps", r.sweeps},
            {"budget_exhausted", r.budget_exhausted},
            {"frontier", r.frontier.size()}};
}

SuiteConfig suite_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "verify must be an object");
    SuiteConfig s;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k == "simple_pairs") s.simple_pairs = get_checked<int>(j, k);
        else if (k == "cone_pairs") s.cone_pairs = get_checked<int>(j, k);
        else if (k == "parabolic_instances") s.parabolic_instances = get_checked<int>(j, k);
        else if (k == "points") s.points = get_checked<int>(j, k);
        else if (k == "corrupt") s.corrupt = get_checked<std::string>(j, k);
        else throw Error(ErrorCode::ConfigError, "unknown verify key " + k);
    }
    if (s.simple_pairs < 1 || s.cone_pairs < 1 || s.parabolic_instances < 1 || s.points < 1)
        throw Error(ErrorCode::ConfigError, "suite sizes must be positive");
    return s;
}

double root_mid(const RunConfig& c, const ModelFamily& fam) {
    return std::isfinite(c.t) ? c.t + 0.5 * fam.cfg.eps0 : fam.t_range.mid();
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be an object");
    RunConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k == "schema") continue;
        if (k == "family") c.family = family_config_from_json(*it);
        else if (k == "budget") c.budget = class_budget_from_json(*it);
        else if (k == "truncation") c.truncation = truncation_from_json(*it);
        else if (k == "tree_depth") c.tree_depth = get_checked<int>(j, k);
        else if (k == "path") c.path = get_checked<std::vector<long>>(j, k);
        else if (k == "t") c.t = null_as_nan(j, k);
        else if (k == "seed") c.seed = get_checked<std::uint64_t>(j, k);
        else if (k == "verify") c.verify = suite_from_json(*it);
        else if (k == "rooted_at") c.rooted_at = get_checked<int>(j, k);
        else if (k == "ds") c.ds = null_as_nan(j, k);
        else if (k == "du") c.du = null_as_nan(j, k);
        else if (k == "h4_grid") c.h4_grid = get_checked<int>(j, k);
        else if (k == "tangency_q") c.tangency_q = get_checked<std::string>(j, k);
        else if (k == "tangency_p") c.tangency_p = get_checked<std::string>(j, k);
        else if (k == "tangency_grid") c.tangency_grid = get_checked<int>(j, k);
        else if (k == "geometry_samples") c.geometry_samples = get_checked<int>(j, k);
        else throw Error(ErrorCode::ConfigError, "unknown config key " + k);
    }
    if (c.tree_depth < 1) throw Error(ErrorCode::ConfigError, "tree_depth must be positive");
    if (static_cast<int>(c.path.size()) > c.tree_depth) throw Error(ErrorCode::ConfigError, "path deeper than tree");
    if (c.rooted_at < -1 || c.rooted_at > 1) throw Error(ErrorCode::ConfigError, "rooted_at must be -1, 0 or 1");
    if (c.h4_grid < 1) throw Error(ErrorCode::ConfigError, "h4_grid must be positive");
    if (c.tangency_grid < 2) throw Error(ErrorCode::ConfigError, "tangency_grid must be at least 2");
    if (c.geometry_samples < 2) throw Error(ErrorCode::ConfigError, "geometry_samples must be at least 2");
    return c;
}

nlohmann::json to_json(const RunConfig& c) {
    return {{"schema", schema_tag("run_config")},
            {"family", to_json(c.family)},
            {"budget", to_json(c.budget)},
            {"truncation", to_json(c.truncation)},
            {"tree_depth", c.tree_depth},
            {"path", c.path},
            {"t", nan_as_null(c.t)},
            {"seed", c.seed},
            {"verify",
             {{"simple_pairs", c.verify.simple_pairs},
              {"cone_pairs", c.verify.cone_pairs},
              {"parabolic_instances", c.verify.parabolic_instances},
              {"points", c.verify.points},
              {"corrupt", c.verify.corrupt}}},
            {"rooted_at", c.rooted_at},
            {"ds", nan_as_null(c.ds)},
            {"du", nan_as_null(c.du)},
            {"h4_grid", c.h4_grid},
            {"tangency_q", c.tangency_q},
            {"tangency_p", c.tangency_p},
            {"tangency_grid", c.tangency_grid},
            {"geometry_samples", c.geometry_samples}};
}

std::vector<std::string> config_warnings(const RunConfig& c) {
    std::vector<std::string> w;
    const auto& f = c.family;
    if (!(f.eps0 < f.eta)) w.push_back("eps0 is not below eta");
    if (!(f.eta < f.tau)) w.push_back("eta is not below tau");
    if (!(f.tau < f.beta - 1.0)) w.push_back("tau is not below beta - 1");
    return w;
}

// ------------------------------------------------------------------ class commands

RClass build_class(const RunConfig& c) {
    return RClass(make_family(c.family), c.budget, c.tree_depth, c.t);
}

BuildOutput summarize(const RClass& cls, const RunConfig& c, const std::vector<ExtendReport>& reports) {
    BuildOutput out;
    out.dump = cls.dump_jsonl();
    out.geometry = geometry_csv(cls.family(), cls.interval(cls.level()).as_interval().mid(), c.geometry_samples);
    std::size_t parabolic = 0, pure = 0;
    for (int id : cls.ids_at(cls.level())) {
        const auto& e = cls.element(id);
        if (e.kind == Element::Kind::Parabolic) ++parabolic;
        if (e.pure()) ++pure;
    }
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : reports) reps.push_back(to_json(r));
    out.budget_exhausted = cls.last_budget_exhausted();
    for (const auto& r : reports) out.budget_exhausted = out.budget_exhausted || r.budget_exhausted;
    const auto& I = cls.interval(cls.level());
    out.summary = {{"schema", schema_tag("build_summary")},
                   {"level", cls.level()},
                   {"interval", {I.lo, I.hi}},
                   {"path", I.path},
                   {"elements", cls.ids_at(cls.level()).size()},
                   {"pure", pure},
                   {"parabolic", parabolic},
                   {"budget_exhausted", out.budget_exhausted},
                   {"extensions", reps},
                   {"warnings", config_warnings(c)}};
    return out;
}

BuildOutput cmd_build(const RunConfig& c) { return cmd_extend(build_class(c), c); }

BuildOutput cmd_extend(RClass cls, const RunConfig& c) {
    std::vector<ExtendReport> reports;
    for (long i : c.path) reports.push_back(cls.extend(i));
    return summarize(cls, c, reports);
}

nlohmann::json cmd_dimension(const RClass& cls, const RunConfig& c) {
    TransferOperator op(cls, c.truncation);
    auto r = solve_dimension(op, c.rooted_at);
    auto g = gibbs_measure(op, r.d_s);
    auto j = to_json(r, c.truncation);
    j["schema"] = schema_tag("dimension");
    j["gibbs_constant"] = g.gibbs_constant;
    j["additivity_error"] = g.additivity_error;
    j["excluded_primes"] = op.excluded_primes();
    j["d_minus"] = op.d_minus();
    j["d_s0"] = cls.family().d_s0;
    j["level"] = cls.level();
    return j;
}

std::string cmd_gibbs(const RClass& cls, const RunConfig& c) {
    TransferOperator op(cls, c.truncation);
    auto r = solve_dimension(op, c.rooted_at);
    return gibbs_csv(gibbs_measure(op, r.d_s));
}

nlohmann::json cmd_exponents(const RunConfig& c) {
    double ds = c.ds, du = c.du;
    if (!std::isfinite(ds) || !std::isfinite(du)) {
        auto fam = make_family(c.family);
        if (!std::isfinite(ds)) ds = fam.d_s0;
        if (!std::isfinite(du)) du = fam.d_u0;
    }
    auto j = to_json(exponents(ds, du));
    j["schema"] = schema_tag("exponents");
    return j;
}

std::string cmd_h4region(const RunConfig& c) { return h4_region_csv(c.h4_grid); }

std::string cmd_dump_tangency(const RunConfig& c) {
    auto fam = make_family(c.family);
    for (const auto* w : {&c.tangency_q, &c.tangency_p})
        if (!word_is_pure(*w) || !valid_itinerary(fam, *w))
            throw Error(ErrorCode::ConfigError, "tangency word " + *w + " is not a pure itinerary");
    auto F0 = pure_cylinder_map(fam, c.tangency_q);
    auto F1 = pure_cylinder_map(fam, c.tangency_p);
    if (F0.dst != 1 || F1.src != 0)
        throw Error(ErrorCode::ConfigError, "tangency pair must end in R_1 and start in R_0");
    const double t = root_mid(c, fam);
    auto J = make_jets(F0, fam.fold_at(t), F1);
    std::ostringstream os;
    os << "t,y0,x1,cbar,w_min,w_minus,w_plus\n";
    const int n = c.tangency_grid;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            double y0 = F0.rect.y.lo + F0.rect.y.length() * i / (n - 1);
            double x1 = F1.rect.x.lo + F1.rect.x.length() * k / (n - 1);
            auto m = tangency_min(J, y0, x1);
            double wm = 0.0, wp = 0.0;
            bool roots = tangency_roots(J, y0, x1, wm, wp);
            os << fmt17(t) << ',' << fmt17(y0) << ',' << fmt17(x1) << ',' << fmt17(m.cbar) << ',' << fmt17(m.w_min)
               << ',';
            if (roots) os << fmt17(wm) << ',' << fmt17(wp);
            else os << ',';
            os << '\n';
        }
    return os.str();
}

std::string cmd_dump_geometry(const RunConfig& c) {
    auto fam = make_family(c.family);
    return geometry_csv(fam, root_mid(c, fam), c.geometry_samples);
}

}  // namespace hs
