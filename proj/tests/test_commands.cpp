#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "horseshoe/acceptance.hpp"
#include "horseshoe/commands.hpp"
#include "horseshoe/errors.hpp"

using namespace hs;

namespace {

int count_lines(const std::string& s) {
    int n = 0;
    for (char ch : s) n += ch == '\n';
    return n;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::NewtonFailure;
}

}  // namespace

TEST_CASE("run config: round trip, unknown keys, ordering warning") {
    RunConfig c;
    c.path = {0, 1};
    c.t = -0.05;
    c.seed = 42;
    c.verify.corrupt = "A_y";
    auto j = to_json(c);
    CHECK(j["schema"] == "horseshoe/run_config/v1");
    auto back = run_config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(std::isnan(run_config_from_json(nlohmann::json::object()).t));

    CHECK(code_of([] { run_config_from_json({{"bogus", 1}}); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { run_config_from_json({{"verify", {{"pairs", 3}}}}); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { run_config_from_json({{"seed", "x"}}); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { run_config_from_json({{"rooted_at", 2}}); }) == ErrorCode::ConfigError);

    auto w = config_warnings(RunConfig{});
    REQUIRE(w.size() == 1);
    CHECK(w[0] == "tau is not below beta - 1");
    RunConfig ordered;
    ordered.family.eta = 0.01;
    ordered.family.tau = 0.02;
    CHECK(config_warnings(ordered).empty());
}

TEST_CASE("build: separated regime has no parabolic elements") {
    RunConfig c;
    c.path = {0};
    auto tangency = cmd_build(c);
    CHECK(tangency.summary["parabolic"].get<int>() > 0);
    c.t = -0.05;
    auto separated = cmd_build(c);
    CHECK(separated.summary["parabolic"] == 0);
    CHECK(separated.summary["extensions"][0]["added_parabolic"] == 0);
    CHECK_FALSE(separated.budget_exhausted);
}

TEST_CASE("build: dump ignores the seed and resumes through load") {
    RunConfig c;
    c.path = {0};
    auto a = cmd_build(c);
    c.seed = 99;
    auto b = cmd_build(c);
    CHECK(a.dump == b.dump);
    CHECK(a.geometry == b.geometry);
    CHECK(a.summary == b.summary);

    RunConfig root;
    auto level0 = cmd_build(root);
    RunConfig step = root;
    step.path = {0};
    auto resumed = cmd_extend(RClass::load_jsonl(level0.dump), step);
    CHECK(resumed.dump == a.dump);
}

TEST_CASE("dimension command on the one-third model") {
    RunConfig c;
    c.family.lambda_s = 1.0 / 3.0;
    c.family.lambda_u = 3.0;
    auto j = cmd_dimension(build_class(c), c);
    CHECK(j["schema"] == "horseshoe/dimension/v1");
    CHECK(std::abs(j["d_s"].get<double>() - std::log(2.0) / std::log(3.0)) < 1e-6);
    CHECK(j["lambda_curve"].size() == 20);
    CHECK(std::abs(j["gibbs_constant"].get<double>() - 1.0) < 1e-10);
    auto csv = cmd_gibbs(build_class(c), c);
    CHECK(csv.rfind("word,", 0) == 0);
}

TEST_CASE("exponents and h4 region commands") {
    RunConfig c;
    c.ds = 0.55;
    c.du = 0.55;
    auto j = cmd_exponents(c);
    CHECK(j["schema"] == "horseshoe/exponents/v1");
    // beta_max = (sigma0 + sigma1) / rho1 with sigma0 = 1 - ds, sigma1 = 0, rho1 = (1 + ds)/2 - du.
    CHECK(j["beta_max"].get<double>() == doctest::Approx(0.45 / 0.325).epsilon(1e-12));
    c.h4_grid = 10;
    auto csv = cmd_h4region(c);
    CHECK(count_lines(csv) == 1 + 10 * 10);
}

TEST_CASE("tangency and geometry dumps") {
    RunConfig c;
    c.tangency_grid = 5;
    auto csv = cmd_dump_tangency(c);
    CHECK(csv.rfind("t,y0,x1,cbar,w_min,w_minus,w_plus\n", 0) == 0);
    CHECK(count_lines(csv) == 1 + 25);
    c.tangency_q = "10";
    CHECK(code_of([&] { cmd_dump_tangency(c); }) == ErrorCode::ConfigError);
    c.tangency_q = "1+1";
    CHECK(code_of([&] { cmd_dump_tangency(c); }) == ErrorCode::ConfigError);
    CHECK(count_lines(cmd_dump_geometry(RunConfig{})) > 10);
}

TEST_CASE("verify: clean run passes, fault injection names exactly one failure") {
    RunConfig c;
    c.verify.points = 2;
    c.verify.parabolic_instances = 2;
    auto clean = cmd_verify(c, {1, 7, 9});
    CHECK(clean["schema"] == "horseshoe/verify_report/v1");
    CHECK(clean["ok"] == true);
    CHECK(clean["checks"].size() == 3);

    c.verify.corrupt = "A_y";
    auto bad = cmd_verify(c, {1, 7, 9});
    CHECK(bad["ok"] == false);
    REQUIRE(bad["failures"].size() == 1);
    CHECK(bad["failures"][0] == "composition calculus against finite differences");
    CHECK(bad["checks"][0]["measured"]["flagged"] == nlohmann::json::array({"A_y"}));

    CHECK(code_of([&] { run_criterion(11, c); }) == ErrorCode::ConfigError);
}
