#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "horseshoe/dimension.hpp"
#include "horseshoe/model_family.hpp"
#include "horseshoe/rclass.hpp"
#include "json.hpp"

namespace hs {

inline constexpr const char* kSchemaVersion = "v1";

struct SuiteConfig {
    int simple_pairs = 100;
    int cone_pairs = 100;
    int parabolic_instances = 20;
    int points = 8;
    std::string corrupt;  // fault injection: formula scaled by 1 + 1e-3
};

struct RunConfig {
    FamilyConfig family;
    ClassBudget budget;
    Truncation truncation;
    int tree_depth = 8;
    std::vector<long> path;  // candidate indices followed by build
    double t = std::numeric_limits<double>::quiet_NaN();  // root interval override [t, t + eps0]
    std::uint64_t seed = 1;
    SuiteConfig verify;
    int rooted_at = -1;
    double ds = std::numeric_limits<double>::quiet_NaN();  // exponents: defaults to the family closed forms
    double du = std::numeric_limits<double>::quiet_NaN();
    int h4_grid = 50;
    std::string tangency_q = "11";
    std::string tangency_p = "00";
    int tangency_grid = 21;
    int geometry_samples = 101;
};

// Unknown keys and invalid values throw ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);
// Ordering 0 < eps0 << eta << tau << beta - 1, read as strict increase.
std::vector<std::string> config_warnings(const RunConfig& c);

struct BuildOutput {
    std::string dump;      // class JSONL
    std::string geometry;  // CSV
    nlohmann::json summary;
    bool budget_exhausted = false;
};

RClass build_class(const RunConfig& c);
BuildOutput summarize(const RClass& cls, const RunConfig& c, const std::vector<ExtendReport>& reports);
BuildOutput cmd_build(const RunConfig& c);
// Extends a loaded class along c.path.
BuildOutput cmd_extend(RClass cls, const RunConfig& c);
nlohmann::json cmd_dimension(const RClass& cls, const RunConfig& c);
std::string cmd_gibbs(const RClass& cls, const RunConfig& c);
nlohmann::json cmd_exponents(const RunConfig& c);
std::string cmd_h4region(const RunConfig& c);
std::string cmd_dump_tangency(const RunConfig& c);
std::string cmd_dump_geometry(const RunConfig& c);

}  // namespace hs
