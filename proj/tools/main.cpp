#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "perfpower/runners.hpp"

namespace {

using perfpower::json;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::int64_t> seed;
    std::optional<int> replicates;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "scenario config file (JSON)")->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "override master_seed");
    cmd->add_option("--replicates", opts.replicates, "override n_rep");
}

int execute(const CommonOpts& opts,
            const std::function<perfpower::RunResult(const json&)>& runner) {
    json j;
    perfpower::RunResult result;
    try {
        j = perfpower::load_json_file(opts.config_path);
        if (opts.seed) j["master_seed"] = *opts.seed;
        if (opts.replicates) j["n_rep"] = *opts.replicates;
        result = runner(j);
    } catch (const perfpower::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    perfpower::write_outputs(result, opts.out_dir);
    std::printf("%s\n", result.report.dump(2).c_str());
    if (!result.checks_pass) {
        std::fprintf(stderr, "one or more checks failed (see report.json)\n");
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"performative power simulation and estimation toolkit"};
    app.require_subcommand(1);

    int rc = 0;
    auto bind = [&rc](CLI::App* cmd, CommonOpts& opts, auto runner) {
        cmd->callback([&opts, runner, &rc]() { rc = execute(opts, runner); });
    };

    CLI::App* power = app.add_subcommand("power", "monopoly strategic-classification power");
    power->require_subcommand(1);
    CommonOpts mono_opts, pers_opts;
    bind(power->add_subcommand("monopoly", "power estimate, bounds and the 1-d sandwich"),
         mono_opts, [](const json& j) {
             return perfpower::run_power_monopoly(perfpower::parse_monopoly_config(j));
         });
    add_common(power->get_subcommand("monopoly"), mono_opts);
    bind(power->add_subcommand("personalized", "exact power under full personalization"),
         pers_opts, [](const json& j) {
             return perfpower::run_power_personalized(perfpower::parse_monopoly_config(j));
         });
    add_common(power->get_subcommand("personalized"), pers_opts);

    CLI::App* compete = app.add_subcommand("compete", "two-firm competition");
    compete->require_subcommand(1);
    CommonOpts eq_opts, zp_opts;
    bind(compete->add_subcommand("equilibrium", "zero-profit symmetric equilibrium"), eq_opts,
         [](const json& j) {
             return perfpower::run_compete_equilibrium(perfpower::parse_competition_config(j));
         });
    add_common(compete->get_subcommand("equilibrium"), eq_opts);
    bind(compete->add_subcommand("zero-power", "power over the feasible set at equilibrium"),
         zp_opts, [](const json& j) {
             return perfpower::run_compete_zero_power(perfpower::parse_competition_config(j));
         });
    add_common(compete->get_subcommand("zero-power"), zp_opts);

    CLI::App* learnsteer = app.add_subcommand("learnsteer", "ex-ante vs ex-post optimization");
    learnsteer->require_subcommand(1);
    CommonOpts ls_opts;
    bind(learnsteer->add_subcommand("check", "risk and parameter-distance bounds"), ls_opts,
         [](const json& j) {
             return perfpower::run_learnsteer_check(perfpower::parse_perfpred_config(j));
         });
    add_common(learnsteer->get_subcommand("check"), ls_opts);

    CLI::App* economy = app.add_subcommand("economy", "multi-firm prediction economies");
    economy->require_subcommand(1);
    CommonOpts mix_opts, col_opts;
    bind(economy->add_subcommand("mixture", "mixture-economy convergence experiment"), mix_opts,
         [](const json& j) {
             return perfpower::run_economy_mixture(perfpower::parse_economy_config(j));
         });
    add_common(economy->get_subcommand("mixture"), mix_opts);
    bind(economy->add_subcommand("collude", "performative optimum vs stable point"), col_opts,
         [](const json& j) {
             return perfpower::run_economy_collude(perfpower::parse_economy_config(j));
         });
    add_common(economy->get_subcommand("collude"), col_opts);

    CLI::App* ddd = app.add_subcommand("ddd", "discrete display design");
    ddd->require_subcommand(1);
    CommonOpts sim_opts, est_opts, nk_opts;
    bind(ddd->add_subcommand("simulate", "generate synthetic impression logs"), sim_opts,
         [](const json& j) {
             return perfpower::run_ddd_simulate(perfpower::parse_ddd_config(j));
         });
    add_common(ddd->get_subcommand("simulate"), sim_opts);
    bind(ddd->add_subcommand("estimate", "RDD fit on an existing log file"), est_opts,
         [](const json& j) {
             return perfpower::run_ddd_estimate(perfpower::parse_ddd_config(j));
         });
    add_common(ddd->get_subcommand("estimate"), est_opts);
    bind(ddd->add_subcommand("nk15", "position-effect case study"), nk_opts, [](const json& j) {
        return perfpower::run_ddd_nk15(perfpower::parse_ddd_config(j));
    });
    add_common(ddd->get_subcommand("nk15"), nk_opts);

    CLI11_PARSE(app, argc, argv);
    return rc;
}
