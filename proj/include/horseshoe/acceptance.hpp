#pragma once

#include <string>
#include <vector>

#include "horseshoe/commands.hpp"
#include "json.hpp"

namespace hs {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    nlohmann::json measured = nlohmann::json::object();
    double seconds = 0.0;
    std::string error;  // set when the check threw
};

nlohmann::json to_json(const CriterionResult& r);

// Acceptance criteria 1..10; suite sizes, seed and fault injection come from c.
CriterionResult run_criterion(int id, const RunConfig& c);
std::vector<CriterionResult> run_acceptance(const RunConfig& c, const std::vector<int>& ids = {});

// Per-invariant report over every criterion; "ok" is false on any failure.
nlohmann::json cmd_verify(const RunConfig& c, const std::vector<int>& ids = {});

}  // namespace hs
