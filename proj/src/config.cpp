#include "perfpower/config.hpp"

#include <fstream>

namespace perfpower {

namespace {

double get_num(const json& j, const std::string& key, std::optional<double> fallback = {}) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError("missing required field '" + key + "'");
    }
    if (!j.at(key).is_number()) throw ConfigError("field '" + key + "' must be a number");
    return j.at(key).get<double>();
}

std::int64_t get_int(const json& j, const std::string& key,
                     std::optional<std::int64_t> fallback = {}) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError("missing required field '" + key + "'");
    }
    if (!j.at(key).is_number_integer()) throw ConfigError("field '" + key + "' must be an integer");
    return j.at(key).get<std::int64_t>();
}

std::string get_str(const json& j, const std::string& key,
                    std::optional<std::string> fallback = {}) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError("missing required field '" + key + "'");
    }
    if (!j.at(key).is_string()) throw ConfigError("field '" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

void expect_scenario(const json& j, const std::string& want) {
    const std::string got = get_str(j, "scenario");
    if (got != want) {
        throw ConfigError("config scenario '" + got + "' does not match subcommand ('" + want +
                          "' expected)");
    }
}

json base_json(const BaseDistribution& b) {
    const char* fam[] = {"uniform", "normal", "logistic"};
    return json{{"family", fam[static_cast<int>(b.family)]}, {"a", b.a}, {"b", b.b}};
}

json posterior_json(const Posterior& p) {
    return json{{"kind", p.kind == Posterior::Kind::Logistic ? "logistic" : "normal-cdf"},
                {"slope", p.slope},
                {"shift", p.shift}};
}

json grid_json(const Grid& g) { return json{{"min", g.lo}, {"max", g.hi}, {"step", g.step}}; }

json loss_json(const LossSpec& l) {
    return json{{"kind", l.kind == LossSpec::Kind::Squared ? "squared" : "zero-one"},
                {"lipschitz_z", l.lipschitz_z},
                {"strong_convexity", l.strong_convexity}};
}

json utility_json(const UtilitySpec& u) { return json{{"gamma", u.gamma}, {"beta", u.beta}}; }

}  // namespace

void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(context + ": unknown key '" + key + "'");
        }
    }
}

BaseDistribution parse_base(const json& j_base, const json& j_posterior) {
    require_keys(j_base, {"family", "a", "b"}, "base");
    require_keys(j_posterior, {"kind", "slope", "shift"}, "posterior");
    BaseDistribution b;
    const std::string fam = get_str(j_base, "family");
    if (fam == "uniform") b.family = BaseDistribution::Family::Uniform;
    else if (fam == "normal") b.family = BaseDistribution::Family::Normal;
    else if (fam == "logistic") b.family = BaseDistribution::Family::Logistic;
    else throw ConfigError("base: unknown family '" + fam + "'");
    b.a = get_num(j_base, "a");
    b.b = get_num(j_base, "b");
    const std::string pk = get_str(j_posterior, "kind");
    if (pk == "logistic") b.posterior.kind = Posterior::Kind::Logistic;
    else if (pk == "normal-cdf") b.posterior.kind = Posterior::Kind::NormalCdf;
    else throw ConfigError("posterior: unknown kind '" + pk + "'");
    b.posterior.slope = get_num(j_posterior, "slope");
    b.posterior.shift = get_num(j_posterior, "shift", 0.0);
    try {
        b.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("base: ") + e.what());
    }
    return b;
}

UtilitySpec parse_utility(const json& j) {
    require_keys(j, {"gamma", "beta"}, "utility");
    UtilitySpec u;
    u.gamma = get_num(j, "gamma");
    u.beta = get_num(j, "beta", 0.0);
    if (!(u.gamma > 0.0)) throw ConfigError("utility: gamma must be > 0");
    if (u.beta < 0.0) throw ConfigError("utility: beta must be >= 0");
    return u;
}

Grid parse_grid(const json& j) {
    require_keys(j, {"min", "max", "step"}, "grid");
    Grid g;
    g.lo = get_num(j, "min");
    g.hi = get_num(j, "max");
    g.step = get_num(j, "step");
    if (!(g.step > 0.0) || !(g.hi > g.lo)) throw ConfigError("grid: requires max > min, step > 0");
    return g;
}

LossSpec parse_loss(const json& j) {
    require_keys(j, {"kind", "lipschitz_z", "strong_convexity"}, "loss");
    LossSpec l;
    const std::string k = get_str(j, "kind");
    if (k == "squared") l.kind = LossSpec::Kind::Squared;
    else if (k == "zero-one") l.kind = LossSpec::Kind::ZeroOne;
    else throw ConfigError("loss: unknown kind '" + k + "'");
    l.lipschitz_z = get_num(j, "lipschitz_z");
    l.strong_convexity = get_num(j, "strong_convexity", 0.0);
    if (l.kind == LossSpec::Kind::ZeroOne && l.strong_convexity != 0.0) {
        throw ConfigError("loss: zero-one loss cannot declare strong convexity");
    }
    return l;
}

MapConfig parse_map(const json& j) {
    MapConfig m;
    m.kind = get_str(j, "kind");
    if (m.kind == "strategic-1d") {
        require_keys(j, {"kind", "base", "posterior", "utility"}, "map");
        m.base = parse_base(j.at("base"), j.at("posterior"));
        m.utility = parse_utility(j.at("utility"));
    } else if (m.kind == "location-shift") {
        require_keys(j, {"kind", "mu0", "eps", "sigma"}, "map");
        m.mu0 = get_num(j, "mu0");
        m.eps = get_num(j, "eps");
        m.sigma = get_num(j, "sigma");
        if (!(m.sigma > 0.0)) throw ConfigError("map: sigma must be > 0");
        if (m.eps < 0.0 || m.eps >= 1.0) throw ConfigError("map: eps must lie in [0, 1)");
    } else {
        throw ConfigError("map: unknown kind '" + m.kind + "'");
    }
    return m;
}

std::unique_ptr<DistributionMap> MapConfig::build(const LossSpec& loss) const {
    if (kind == "strategic-1d") {
        return std::make_unique<Strategic1dMap>(base, utility, loss);
    }
    return std::make_unique<LocationShiftMap>(mu0, eps, sigma, loss);
}

MonopolyConfig parse_monopoly_config(const json& j) {
    expect_scenario(j, "monopoly-strategic");
    require_keys(j,
                 {"scenario", "base", "posterior", "utility", "grid", "n_samples", "n_rep",
                  "master_seed"},
                 "config");
    MonopolyConfig c;
    c.base = parse_base(j.at("base"), j.at("posterior"));
    c.utility = parse_utility(j.at("utility"));
    c.grid = parse_grid(j.at("grid"));
    c.n_samples = static_cast<int>(get_int(j, "n_samples", 100000));
    c.n_rep = static_cast<int>(get_int(j, "n_rep", 1));
    c.master_seed = static_cast<std::uint64_t>(get_int(j, "master_seed"));
    if (c.n_samples < 1 || c.n_rep < 1) throw ConfigError("config: n_samples and n_rep must be >= 1");
    return c;
}

json MonopolyConfig::resolved() const {
    return json{{"scenario", "monopoly-strategic"},
                {"base", base_json(base)},
                {"posterior", posterior_json(base.posterior)},
                {"utility", utility_json(utility)},
                {"grid", grid_json(grid)},
                {"n_samples", n_samples},
                {"n_rep", n_rep},
                {"master_seed", master_seed}};
}

CompetitionConfig parse_competition_config(const json& j) {
    expect_scenario(j, "competition");
    require_keys(j,
                 {"scenario", "base", "posterior", "gamma", "alpha", "grid_span", "grid_points",
                  "n_samples", "n_rep", "n_mc_utility", "deviation_scan_points", "master_seed"},
                 "config");
    CompetitionConfig c;
    c.scenario.base = parse_base(j.at("base"), j.at("posterior"));
    c.scenario.gamma = get_num(j, "gamma", 1.0);
    c.scenario.alpha = get_num(j, "alpha", 1.0);
    c.grid_span = get_num(j, "grid_span", 2.0);
    c.grid_points = static_cast<int>(get_int(j, "grid_points", 41));
    c.n_samples = static_cast<int>(get_int(j, "n_samples", 20000));
    c.n_rep = static_cast<int>(get_int(j, "n_rep", 2));
    c.n_mc_utility = get_int(j, "n_mc_utility", 1000000);
    c.deviation_scan_points = static_cast<int>(get_int(j, "deviation_scan_points", 50));
    c.master_seed = static_cast<std::uint64_t>(get_int(j, "master_seed"));
    c.scenario.validate();
    if (c.grid_points < 2) throw ConfigError("config: grid_points must be >= 2");
    return c;
}

json CompetitionConfig::resolved() const {
    return json{{"scenario", "competition"},
                {"base", base_json(scenario.base)},
                {"posterior", posterior_json(scenario.base.posterior)},
                {"gamma", scenario.gamma},
                {"alpha", scenario.alpha},
                {"grid_span", grid_span},
                {"grid_points", grid_points},
                {"n_samples", n_samples},
                {"n_rep", n_rep},
                {"n_mc_utility", n_mc_utility},
                {"deviation_scan_points", deviation_scan_points},
                {"master_seed", master_seed}};
}

namespace {

json map_json(const MapConfig& m) {
    if (m.kind == "strategic-1d") {
        return json{{"kind", m.kind},
                    {"base", base_json(m.base)},
                    {"posterior", posterior_json(m.base.posterior)},
                    {"utility", utility_json(m.utility)}};
    }
    return json{{"kind", m.kind}, {"mu0", m.mu0}, {"eps", m.eps}, {"sigma", m.sigma}};
}

}  // namespace

PerfpredConfig parse_perfpred_config(const json& j) {
    expect_scenario(j, "perfpred");
    require_keys(j,
                 {"scenario", "map", "loss", "grid", "n_samples", "power_units", "n_rep",
                  "master_seed"},
                 "config");
    PerfpredConfig c;
    c.map = parse_map(j.at("map"));
    c.loss = parse_loss(j.at("loss"));
    c.grid = parse_grid(j.at("grid"));
    c.n_samples = static_cast<int>(get_int(j, "n_samples", 200000));
    c.power_units = static_cast<int>(get_int(j, "power_units", 20000));
    c.n_rep = static_cast<int>(get_int(j, "n_rep", 2));
    c.master_seed = static_cast<std::uint64_t>(get_int(j, "master_seed"));
    return c;
}

json PerfpredConfig::resolved() const {
    return json{{"scenario", "perfpred"}, {"map", map_json(map)},   {"loss", loss_json(loss)},
                {"grid", grid_json(grid)}, {"n_samples", n_samples}, {"power_units", power_units},
                {"n_rep", n_rep},          {"master_seed", master_seed}};
}

EconomyConfig parse_economy_config(const json& j) {
    expect_scenario(j, "economy-mixture");
    require_keys(j,
                 {"scenario", "map", "loss", "firm_counts", "grid", "power_units", "n_rep",
                  "master_seed"},
                 "config");
    EconomyConfig c;
    c.map = parse_map(j.at("map"));
    c.loss = parse_loss(j.at("loss"));
    c.grid = parse_grid(j.at("grid"));
    if (j.contains("firm_counts")) {
        if (!j.at("firm_counts").is_array()) throw ConfigError("config: firm_counts must be an array");
        c.firm_counts.clear();
        int prev = 0;
        for (const auto& v : j.at("firm_counts")) {
            const int cval = v.get<int>();
            if (cval < 1 || cval <= prev) {
                throw ConfigError("config: firm_counts must be ascending positive integers");
            }
            c.firm_counts.push_back(cval);
            prev = cval;
        }
    }
    c.power_units = static_cast<int>(get_int(j, "power_units", 20000));
    c.n_rep = static_cast<int>(get_int(j, "n_rep", 8));
    c.master_seed = static_cast<std::uint64_t>(get_int(j, "master_seed"));
    return c;
}

json EconomyConfig::resolved() const {
    return json{{"scenario", "economy-mixture"},
                {"map", map_json(map)},
                {"loss", loss_json(loss)},
                {"firm_counts", firm_counts},
                {"grid", grid_json(grid)},
                {"power_units", power_units},
                {"n_rep", n_rep},
                {"master_seed", master_seed}};
}

DddConfig parse_ddd_config(const json& j) {
    expect_scenario(j, "ddd");
    require_keys(j,
                 {"scenario", "world", "log_model", "threshold", "noise", "n_impressions",
                  "lambda", "with_keyword_effects", "logs_path", "n_rep", "master_seed"},
                 "config");
    DddConfig c;
    if (j.contains("world")) {
        const json& w = j.at("world");
        require_keys(w, {"kind", "n_viewers", "item_count", "affinity", "m1", "m2"}, "world");
        c.world_kind = get_str(w, "kind", "random");
        if (c.world_kind != "random" && c.world_kind != "uniform") {
            throw ConfigError("world: kind must be 'random' or 'uniform'");
        }
        c.n_viewers = static_cast<int>(get_int(w, "n_viewers", 100));
        c.item_count = static_cast<int>(get_int(w, "item_count", 10));
        c.affinity = get_num(w, "affinity", 0.5);
        c.m1 = get_num(w, "m1", 0.1);
        c.m2 = get_num(w, "m2", 0.05);
    }
    if (j.contains("log_model")) {
        const json& lm = j.at("log_model");
        require_keys(lm,
                     {"n_keywords", "baseline_ctr", "position_effect", "gamma1", "gamma2",
                      "score_halfwidth"},
                     "log_model");
        c.log_model.n_keywords = static_cast<int>(get_int(lm, "n_keywords", 40));
        c.log_model.baseline_ctr = get_num(lm, "baseline_ctr", 0.0233);
        c.log_model.position_effect = get_num(lm, "position_effect", 0.0);
        c.log_model.gamma1 = get_num(lm, "gamma1", 0.0);
        c.log_model.gamma2 = get_num(lm, "gamma2", 0.0);
        c.log_model.score_halfwidth = get_num(lm, "score_halfwidth", 0.5);
    }
    c.threshold = get_num(j, "threshold", 10.0);
    c.noise = get_num(j, "noise", 0.0);
    c.n_impressions = get_int(j, "n_impressions", 1000000);
    c.lambda = get_num(j, "lambda", 0.5);
    if (j.contains("with_keyword_effects")) {
        if (!j.at("with_keyword_effects").is_boolean()) {
            throw ConfigError("config: with_keyword_effects must be a boolean");
        }
        c.with_keyword_effects = j.at("with_keyword_effects").get<bool>();
    }
    c.logs_path = get_str(j, "logs_path", "logs.csv");
    c.n_rep = static_cast<int>(get_int(j, "n_rep", 400));
    c.master_seed = static_cast<std::uint64_t>(get_int(j, "master_seed"));
    return c;
}

RecommenderWorld DddConfig::build_world() const {
    if (world_kind == "uniform") {
        return make_uniform_world(n_viewers, item_count, affinity, m1, m2, master_seed);
    }
    return make_random_world(n_viewers, item_count, master_seed);
}

json DddConfig::resolved() const {
    return json{{"scenario", "ddd"},
                {"world",
                 json{{"kind", world_kind},
                      {"n_viewers", n_viewers},
                      {"item_count", item_count},
                      {"affinity", affinity},
                      {"m1", m1},
                      {"m2", m2}}},
                {"log_model",
                 json{{"n_keywords", log_model.n_keywords},
                      {"baseline_ctr", log_model.baseline_ctr},
                      {"position_effect", log_model.position_effect},
                      {"gamma1", log_model.gamma1},
                      {"gamma2", log_model.gamma2},
                      {"score_halfwidth", log_model.score_halfwidth}}},
                {"threshold", threshold},
                {"noise", noise},
                {"n_impressions", n_impressions},
                {"lambda", lambda},
                {"with_keyword_effects", with_keyword_effects},
                {"logs_path", logs_path},
                {"n_rep", n_rep},
                {"master_seed", master_seed}};
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return j;
}

}  // namespace perfpower
