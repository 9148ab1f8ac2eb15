#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "horseshoe/acceptance.hpp"
#include "horseshoe/commands.hpp"
#include "horseshoe/errors.hpp"

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kBudgetExhausted = 3 };

struct Options {
    std::string config;
    std::string load;
    std::string out;
    std::vector<double> t;
    std::vector<std::uint64_t> seed;
    std::vector<long> path;
    std::vector<int> rooted_at;
    std::vector<double> ds, du;
    std::vector<int> grid;
    std::vector<std::string> corrupt;
    std::vector<int> criteria;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw hs::Error(hs::ErrorCode::ConfigError, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw hs::Error(hs::ErrorCode::ConfigError, "cannot write " + path);
    out << text;
}

// Writes to --out when given, else stdout.
void emit(const Options& o, const std::string& text) {
    if (o.out.empty()) std::cout << text;
    else write_file(o.out, text);
}

hs::RunConfig load_config(const Options& o) {
    hs::RunConfig c;
    if (!o.config.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(o.config));
        } catch (const nlohmann::json::parse_error& e) {
            throw hs::Error(hs::ErrorCode::ConfigError, o.config + ": " + e.what());
        }
        c = hs::run_config_from_json(j);
    }
    if (!o.t.empty()) c.t = o.t.back();
    if (!o.seed.empty()) c.seed = o.seed.back();
    if (!o.path.empty()) c.path = o.path;
    if (!o.rooted_at.empty()) c.rooted_at = o.rooted_at.back();
    if (!o.ds.empty()) c.ds = o.ds.back();
    if (!o.du.empty()) c.du = o.du.back();
    if (!o.grid.empty()) c.h4_grid = c.tangency_grid = o.grid.back();
    if (!o.corrupt.empty()) c.verify.corrupt = o.corrupt.back();
    // Re-validate after overrides.
    c = hs::run_config_from_json(hs::to_json(c));
    for (const auto& w : hs::config_warnings(c)) std::cerr << "warning: " << w << '\n';
    return c;
}

hs::RClass class_for(const Options& o, const hs::RunConfig& c) {
    if (!o.load.empty()) return hs::RClass::load_jsonl(read_file(o.load));
    hs::RClass cls = hs::build_class(c);
    for (long i : c.path) cls.extend(i);
    return cls;
}

int write_build(const Options& o, const hs::BuildOutput& b) {
    const std::string dir = o.out.empty() ? "." : o.out;
    std::filesystem::create_directories(dir);
    write_file(dir + "/class.jsonl", b.dump);
    write_file(dir + "/geometry.csv", b.geometry);
    write_file(dir + "/summary.json", b.summary.dump(2) + "\n");
    std::cout << b.summary.dump(2) << '\n';
    return b.budget_exhausted ? kBudgetExhausted : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Affine-like horseshoe classes, parabolic composition and transverse dimension"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* s) {
        s->add_option("--config", o.config, "JSON run config");
        s->add_option("--out", o.out, "output file, or directory for build/extend");
        s->add_option("--t", o.t, "root interval left end, [t, t + eps0]");
        s->add_option("--seed", o.seed, "seed for randomized suites");
        s->add_option("--path", o.path, "candidate indices to extend along")->delimiter(',');
    };
    auto* build = app.add_subcommand("build", "build a class along the interval-tree path");
    auto* extend = app.add_subcommand("extend", "resume a dumped class and extend along the path");
    auto* verify = app.add_subcommand("verify", "run every invariant check, JSON report");
    auto* dimension = app.add_subcommand("dimension", "transverse dimension and Gibbs summary, JSON");
    auto* gibbs = app.add_subcommand("gibbs", "per-cylinder Gibbs measure, CSV");
    auto* expo = app.add_subcommand("exponents", "exponent set, JSON");
    auto* h4 = app.add_subcommand("h4-region", "(d_s, d_u) grid with H4 and beta_max, CSV");
    auto* tangency = app.add_subcommand("dump-tangency", "tangency grid of a pure pair, CSV");
    auto* geometry = app.add_subcommand("dump-geometry", "rectangle and tongue polylines, CSV");
    for (auto* s : {build, extend, verify, dimension, gibbs, expo, h4, tangency, geometry}) common(s);
    extend->add_option("--load", o.load, "class dump to resume")->required();
    for (auto* s : {dimension, gibbs}) {
        s->add_option("--load", o.load, "class dump instead of building");
        s->add_option("--rooted-at", o.rooted_at, "restrict states to one rectangle (0 or 1)");
    }
    expo->add_option("--ds", o.ds, "stable dimension");
    expo->add_option("--du", o.du, "unstable dimension");
    h4->add_option("--grid", o.grid, "grid points per axis");
    tangency->add_option("--grid", o.grid, "grid points per axis");
    verify->add_option("--corrupt", o.corrupt, "fault injection: scale one formula by 1 + 1e-3");
    verify->add_option("--criteria", o.criteria, "subset of criteria 1..10")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        const hs::RunConfig c = load_config(o);
        if (*build) return write_build(o, hs::cmd_build(c));
        if (*extend) return write_build(o, hs::cmd_extend(hs::RClass::load_jsonl(read_file(o.load)), c));
        if (*verify) {
            auto report = hs::cmd_verify(c, o.criteria);
            emit(o, report.dump(2) + "\n");
            for (const auto& f : report["failures"]) std::cerr << "FAIL: " << f.get<std::string>() << '\n';
            return report["ok"].get<bool>() ? kOk : kVerifyFailed;
        }
        if (*dimension) emit(o, hs::cmd_dimension(class_for(o, c), c).dump(2) + "\n");
        else if (*gibbs) emit(o, hs::cmd_gibbs(class_for(o, c), c));
        else if (*expo) emit(o, hs::cmd_exponents(c).dump(2) + "\n");
        else if (*h4) emit(o, hs::cmd_h4region(c));
        else if (*tangency) emit(o, hs::cmd_dump_tangency(c));
        else if (*geometry) emit(o, hs::cmd_dump_geometry(c));
        return kOk;
    } catch (const hs::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (e.code() == hs::ErrorCode::ConfigError) return kConfigError;
        if (e.code() == hs::ErrorCode::BudgetExhausted) return kBudgetExhausted;
        return kVerifyFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
}
