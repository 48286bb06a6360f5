#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dualpass/authserver.hpp"

namespace dualpass {

struct StepResult {
    int index = 0;
    std::string description;
    nlohmann::ordered_json expected;
    nlohmann::ordered_json actual;
    bool pass = false;
};

struct ScenarioReport {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<StepResult> steps;
    bool pass = false;
};

/// Runs a scenario against a fresh service with a fresh store (a temporary
/// file, removed afterwards), a seeded rng, and a mock clock. Step
/// mismatches are recorded and the run continues to completion.
ScenarioReport run_scenario(const nlohmann::json& scenario,
                            std::optional<std::uint64_t> seed_override = std::nullopt);

std::vector<std::string> builtin_scenario_names();

/// Throws Errc::invalid_argument for unknown names.
nlohmann::json builtin_scenario(const std::string& name);

std::string render_report_text(const ScenarioReport& report);
nlohmann::ordered_json report_to_json(const ScenarioReport& report);

} // namespace dualpass
