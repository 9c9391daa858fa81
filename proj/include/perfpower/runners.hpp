#pragma once

#include <string>
#include <utility>
#include <vector>

#include "perfpower/config.hpp"

namespace perfpower {

// Outcome of one scenario run: a structured report, the fully-resolved config
// it can be reproduced from, and CSV tables keyed by file name.
struct RunResult {
    json report;
    json resolved_config;
    std::vector<std::pair<std::string, std::string>> csv_files;
    bool checks_pass = true;
};

RunResult run_power_monopoly(const MonopolyConfig& cfg);
RunResult run_power_personalized(const MonopolyConfig& cfg);
RunResult run_learnsteer_check(const PerfpredConfig& cfg);
RunResult run_economy_mixture(const EconomyConfig& cfg);
RunResult run_economy_collude(const EconomyConfig& cfg);
RunResult run_compete_equilibrium(const CompetitionConfig& cfg);
RunResult run_compete_zero_power(const CompetitionConfig& cfg);
RunResult run_ddd_simulate(const DddConfig& cfg);
RunResult run_ddd_estimate(const DddConfig& cfg);
RunResult run_ddd_nk15(const DddConfig& cfg);

// Writes report.json, resolved_config.json and the CSV tables into out_dir.
void write_outputs(const RunResult& result, const std::string& out_dir);

}  // namespace perfpower
