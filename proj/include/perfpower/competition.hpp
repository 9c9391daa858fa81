#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "perfpower/distributions.hpp"
#include "perfpower/numerics.hpp"
#include "perfpower/power.hpp"
#include "perfpower/stats.hpp"
#include "perfpower/strategic.hpp"

namespace perfpower {

// Two firms with threshold classifiers competing for a 1-d strategic
// population. Participants pick the firm with the better achievable utility
// (tie-break: lower threshold, fair coin at equal thresholds) and then adapt
// at budget gamma.
struct CompetitionScenario {
    BaseDistribution base;
    CostModel cost = CostModel::absolute_difference();
    double gamma = 1.0;  // service utility of a positive classification
    double alpha = 1.0;  // firm payoff scale per accepted participant

    void validate() const;
};

// The lowest original feature from which `budget` suffices to reach theta:
// the unique xi < theta with c(xi, theta) = budget (bisection to 1e-9).
double xi_inverse(double theta, double budget, const CostModel& cost);

// Which firm the participant joins; 1 or 2.
int participant_choice(double theta1, double theta2, double x_orig, double gamma,
                       const CostModel& cost, std::uint64_t seed);

struct FirmUtilityEstimate {
    double mean = 0.0;
    double se = 0.0;
    int n = 0;
};

// MC estimate of the firm's expected payoff when it deploys theta_self
// against theta_other.
FirmUtilityEstimate firm_utility(double theta_self, double theta_other,
                                 const CompetitionScenario& sc, int n, std::uint64_t seed);

// Noise-free quadrature twin, used by the equilibrium machinery.
double firm_utility_quadrature(double theta_self, double theta_other,
                               const CompetitionScenario& sc);

struct ZeroProfitSolution {
    double theta_star = 0.0;
    double xi_star = 0.0;
    double conditional_mean_residual = 0.0;  // |E[y=1 | x >= xi*] - 1/2|
};

// Solves the zero-profit condition E[y = 1 | x >= xi(theta*)] = 1/2 by
// bisection on quadrature of the conditional mean. Throws with a diagnostic
// when no finite root exists (unconditional positive rate >= 1/2).
ZeroProfitSolution zero_profit_equilibrium(const CompetitionScenario& sc);

// Smallest threshold yielding nonnegative utility against theta_other;
// +infinity when acceptance is never profitable.
double feasible_min_threshold(double theta_other, const CompetitionScenario& sc);

// P <= L min(c(theta_min, theta), gamma) + gamma L p_reach([theta_min, theta]).
double competition_power_bound(double theta_min, double theta, const CompetitionScenario& sc,
                               double lipschitz);

struct ZeroPowerReport {
    double theta_star = 0.0;
    double xi_star = 0.0;
    PowerEstimate competition_power;  // over the feasible set F+(theta*)
    PowerEstimate monopoly_control;   // same population, competitor removed
    double bound_at_equilibrium = 0.0;
    double epsilon_zero = 1e-6;
    bool pass = false;
};

// Verifies that power over F+(theta*) = [theta*, inf) vanishes at the
// symmetric equilibrium while a monopoly on the same population retains
// strictly positive power.
ZeroPowerReport verify_zero_power(const CompetitionScenario& sc, double grid_span,
                                  int grid_points, int n_units, int n_rep, std::uint64_t seed);

}  // namespace perfpower
