#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "perfpower/competition.hpp"
#include "perfpower/ddd.hpp"
#include "perfpower/distributions.hpp"
#include "perfpower/numerics.hpp"
#include "perfpower/perfpred.hpp"
#include "perfpower/strategic.hpp"

namespace perfpower {

using json = nlohmann::json;

// Config rejection: unknown keys, missing fields, invariant violations.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rejects keys outside the allowed set; context names the object in messages.
void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::string& context);

BaseDistribution parse_base(const json& j_base, const json& j_posterior);
UtilitySpec parse_utility(const json& j);
Grid parse_grid(const json& j);
LossSpec parse_loss(const json& j);

// Monopoly distribution-map spec: strategic-1d or location-shift.
struct MapConfig {
    std::string kind;
    // strategic-1d
    BaseDistribution base;
    UtilitySpec utility;
    // location-shift
    double mu0 = 0.0;
    double eps = 0.0;
    double sigma = 1.0;

    std::unique_ptr<DistributionMap> build(const LossSpec& loss) const;
};
MapConfig parse_map(const json& j);

struct MonopolyConfig {
    BaseDistribution base;
    UtilitySpec utility;
    Grid grid;
    int n_samples = 100000;
    int n_rep = 1;
    std::uint64_t master_seed = 1;

    json resolved() const;
};
MonopolyConfig parse_monopoly_config(const json& j);

struct CompetitionConfig {
    CompetitionScenario scenario;
    double grid_span = 2.0;
    int grid_points = 41;
    int n_samples = 20000;
    int n_rep = 2;
    std::int64_t n_mc_utility = 1000000;
    int deviation_scan_points = 50;
    std::uint64_t master_seed = 1;

    json resolved() const;
};
CompetitionConfig parse_competition_config(const json& j);

struct PerfpredConfig {
    MapConfig map;
    LossSpec loss;
    Grid grid;
    int n_samples = 200000;
    int power_units = 20000;
    int n_rep = 2;
    std::uint64_t master_seed = 1;

    json resolved() const;
};
PerfpredConfig parse_perfpred_config(const json& j);

struct EconomyConfig {
    MapConfig map;
    LossSpec loss;
    std::vector<int> firm_counts = {1, 2, 4, 8, 16, 32};
    Grid grid;
    int power_units = 20000;
    int n_rep = 8;
    std::uint64_t master_seed = 1;

    json resolved() const;
};
EconomyConfig parse_economy_config(const json& j);

struct DddConfig {
    // recommender world for simulate-style runs
    std::string world_kind = "random";  // random | uniform
    int n_viewers = 100;
    int item_count = 10;
    double affinity = 0.5;
    double m1 = 0.1;
    double m2 = 0.05;
    // impression logs / RDD
    LogModel log_model;
    double threshold = 10.0;
    double noise = 0.0;
    std::int64_t n_impressions = 1000000;
    double lambda = 0.5;
    bool with_keyword_effects = true;
    std::string logs_path = "logs.csv";
    int n_rep = 400;
    std::uint64_t master_seed = 1;

    RecommenderWorld build_world() const;
    json resolved() const;
};
DddConfig parse_ddd_config(const json& j);

json load_json_file(const std::string& path);

}  // namespace perfpower
