#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perfpower/numerics.hpp"
#include "perfpower/perfpred.hpp"
#include "perfpower/power.hpp"

namespace perfpower {

// Uniform mixture economy over a monopoly distribution map: each participant
// chooses one of the C firms uniformly at random, so a single firm's
// counterfactual reaches a participant with probability 1/C.
struct MultiFirmMap {
    int firm_count = 1;
    const DistributionMap* monopoly = nullptr;

    void validate() const;
};

// One mixture draw: the unit's firm assignment comes from a seed-derived
// substream (independent of every theta), firm `acting_firm` deviates to
// acting_theta while the rest hold the profile.
Obs mixture_draw(const MultiFirmMap& map, std::span<const double> profile, int acting_firm,
                 std::optional<double> acting_theta, std::uint64_t seed);

struct EquilibriumProfile {
    std::vector<double> thetas;
    double residual = 0.0;  // max unilateral grid improvement at the profile
    bool converged = false;
    bool symmetric = false;
    std::vector<double> multistart_equilibria;  // distinct firm-0 solutions from extra starts
};

// Round-robin ex-post best responses on the grid until no firm can improve
// by more than tol. Uses the exact risk path when the monopoly map provides
// one (n_mc == 0), otherwise common-random-number Monte Carlo with n_mc draws.
EquilibriumProfile best_response_dynamics(const MultiFirmMap& map,
                                          const std::vector<LossSpec>& losses, const Grid& grid,
                                          int max_iter, double tol, std::uint64_t seed,
                                          int n_mc = 0, int n_starts = 1);

struct FirmSuboptimality {
    int firm = 0;
    double risk_at_profile = 0.0;
    double min_risk = 0.0;
    double bound = 0.0;  // min_risk + Lz * P_firm
    double slack = 0.0;
    bool pass = false;
};

struct EquilibriumSuboptimalityReport {
    std::vector<FirmSuboptimality> firms;
    bool all_pass = true;
};

// At the frozen equilibrium distribution D, each firm's risk exceeds the
// decoupled optimum by at most Lz * P_i.
EquilibriumSuboptimalityReport check_equilibrium_suboptimality(
    const EquilibriumProfile& profile, const MultiFirmMap& map,
    const std::vector<LossSpec>& losses, const std::vector<PowerEstimate>& power_per_firm,
    const Grid& grid, std::uint64_t seed, int n_mc = 0);

// Symmetric mixture equilibrium by damped fixed-point iteration on the grid:
// theta <- argmin (1/C) [ PR(theta') + (C-1) R(theta, theta') ].
struct SymmetricEquilibrium {
    double theta = 0.0;
    bool converged = false;
    double residual = 0.0;
};
SymmetricEquilibrium symmetric_mixture_equilibrium(const DistributionMap& monopoly, int C,
                                                   const Grid& grid, int max_iter = 200);

struct MixtureRow {
    int firm_count = 0;
    double theta_star = 0.0;
    double gap = 0.0;    // E_D(theta*) l(theta*) - min_theta E_D(theta*) l(theta)
    double bound = 0.0;  // Lz * P_hat / C
    double slack = 0.0;
    bool pass = false;
    bool converged = false;
};

struct MixtureTable {
    std::vector<MixtureRow> rows;
    double spearman_gap_vs_inv_c = 0.0;
    double monopoly_power = 0.0;  // at the largest-C equilibrium reference
    bool all_pass = true;
};

// Cor-style convergence experiment: symmetric equilibria for each C, the
// suboptimality gap on the frozen monopoly map, and the 1/C bound.
MixtureTable mixture_convergence_experiment(const DistributionMap& monopoly,
                                            const std::vector<int>& firm_counts,
                                            const Grid& grid, int n_units, int n_rep,
                                            std::uint64_t seed);

struct CollusionReport {
    double theta_po = 0.0;
    double theta_st = 0.0;
    double param_gap = 0.0;
    double risk_po = 0.0;
    double risk_st = 0.0;
    bool stable_found = false;
};

// Performative optimum vs performatively stable point of the monopoly map;
// the stable point is the root of the retraining displacement
// argmin_theta' R(theta, theta') - theta.
CollusionReport collusion_comparison(const DistributionMap& monopoly, const Grid& grid,
                                     std::uint64_t seed);

// Monopoly power over a threshold/parameter grid, with the reference state
// taken after deploying theta_ref (the economy's status quo).
PowerEstimate monopoly_power_at(const DistributionMap& map, std::optional<double> theta_ref,
                                const Grid& grid, int n_units, int n_rep, std::uint64_t seed);

// Power of a single firm inside the uniform mixture at a symmetric profile.
PowerEstimate mixture_per_firm_power(const DistributionMap& monopoly, int C, double theta_star,
                                     const Grid& grid, int n_units, int n_rep,
                                     std::uint64_t seed);

}  // namespace perfpower
