#pragma once

#include "config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pathflow::app {

struct GateResult {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool passed = false;
};

struct RunOutcome {
    Json report;
    std::vector<GateResult> gates;
    bool passed() const;
};

// Writes report.json and the subcommand's data files into out.
RunOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out);

// Exit codes: 0 all gates pass, 1 gate failure, 2 configuration error, 3 runtime failure.
int run_cli(std::optional<Subcommand> subcommand, const std::filesystem::path& config_file,
            const std::filesystem::path& out, std::optional<std::uint64_t> seed_override);

}  // namespace pathflow::app
