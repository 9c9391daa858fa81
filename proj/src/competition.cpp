#include "perfpower/competition.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "perfpower/rng.hpp"

namespace perfpower {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// G(xi) = integral_xi^hi pdf(x) (p(x) - 1/2) dx. The zero-profit condition
// E[y=1 | x >= xi] = 1/2 is exactly G(xi) = 0.
double half_excess_integral(const CompetitionScenario& sc, double xi) {
    auto [lo, hi] = sc.base.quad_support();
    const double a = std::max(xi, lo);
    if (a >= hi) return 0.0;
    return adaptive_simpson(
        [&sc](double x) { return sc.base.pdf(x) * (sc.base.posterior(x) - 0.5); }, a, hi, 1e-13);
}

double tail_mass(const CompetitionScenario& sc, double xi) {
    return 1.0 - sc.base.cdf(xi);
}

double conditional_mean_residual(const CompetitionScenario& sc, double xi) {
    const double mass = tail_mass(sc, xi);
    if (mass <= 0.0) return 0.0;
    return half_excess_integral(sc, xi) / mass;
}

// Inverts c(xi, theta) = budget upward: the threshold whose reach boundary is xi.
double theta_from_xi(double xi, double budget, const CostModel& cost) {
    auto g = [&](double theta) { return cost.scalar(xi, theta) - budget; };
    double span = std::max(1.0, budget);
    double hi = xi + span;
    for (int k = 0; k < 60 && g(hi) < 0.0; ++k) {
        span *= 2.0;
        hi = xi + span;
    }
    return bisect(g, xi, hi, 1e-12, 1e-12);
}

}  // namespace

void CompetitionScenario::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("CompetitionScenario: gamma must be > 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("CompetitionScenario: alpha must be > 0");
    base.validate();
}

double xi_inverse(double theta, double budget, const CostModel& cost) {
    if (!(budget > 0.0)) throw std::invalid_argument("xi_inverse: budget must be positive");
    auto g = [&](double x) { return cost.scalar(x, theta) - budget; };
    double lo;
    try {
        lo = expand_bracket_down(g, theta, std::max(1.0, budget));
    } catch (const std::runtime_error&) {
        throw std::runtime_error("xi_inverse: cost never reaches the budget below theta=" +
                                 std::to_string(theta));
    }
    return bisect(g, lo, theta, 1e-12, 1e-9);
}

int participant_choice(double theta1, double theta2, double x_orig, double gamma,
                       const CostModel& cost, std::uint64_t seed) {
    auto achievable = [&](double theta) {
        if (x_orig >= theta) return gamma;
        return std::max(0.0, gamma - cost.scalar(x_orig, theta));
    };
    const double u1 = achievable(theta1);
    const double u2 = achievable(theta2);
    if (u1 > u2) return 1;
    if (u2 > u1) return 2;
    if (theta1 < theta2) return 1;
    if (theta2 < theta1) return 2;
    return (splitmix64(derive_seed(seed, fnv1a("firm-coin"))) & 1ULL) ? 1 : 2;
}

FirmUtilityEstimate firm_utility(double theta_self, double theta_other,
                                 const CompetitionScenario& sc, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("firm_utility: n must be >= 1");
    std::vector<double> payoff(static_cast<std::size_t>(n));
    const double xi_self = xi_inverse(theta_self, sc.gamma, sc.cost);
    for (int i = 0; i < n; ++i) {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
        auto eng = make_engine(s);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        const double x = sc.base.sample(eng);
        const double y = (u01(eng) < sc.base.posterior(x)) ? 1.0 : 0.0;
        const int choice = participant_choice(theta_self, theta_other, x, sc.gamma, sc.cost, s);
        double v = 0.0;
        if (choice == 1) {
            const bool accepted = (x >= theta_self) || (x >= xi_self);
            if (accepted) v = sc.alpha * (2.0 * y - 1.0);
        }
        payoff[static_cast<std::size_t>(i)] = v;
    }
    const MeanSe ms = mean_se(payoff);
    return {ms.mean, ms.se, n};
}

double firm_utility_quadrature(double theta_self, double theta_other,
                               const CompetitionScenario& sc) {
    if (theta_self > theta_other) return 0.0;  // tie-break: all pick the lower threshold
    const double xi_self = xi_inverse(theta_self, sc.gamma, sc.cost);
    const double g = half_excess_integral(sc, xi_self);
    if (theta_self == theta_other) return sc.alpha * g;  // half the base, doubled payoff share
    return 2.0 * sc.alpha * g;
}

ZeroProfitSolution zero_profit_equilibrium(const CompetitionScenario& sc) {
    sc.validate();
    // Precondition for a finite root: the unconditional positive rate sits
    // below 1/2, so the half-excess integral starts negative.
    auto [lo_support, hi_support] = sc.base.quad_support();
    const double total = half_excess_integral(sc, lo_support);
    if (total >= 0.0) {
        throw std::runtime_error(
            "zero_profit_equilibrium: no finite root (unconditional positive rate >= 1/2; "
            "E[p] - 1/2 integral = " +
            std::to_string(total) + ")");
    }
    // G is increasing while p < 1/2 and positive above the posterior median,
    // so the unique root sits below it.
    const double x_half = solve_theta_sl(sc.base);
    auto g = [&](double xi) { return half_excess_integral(sc, xi); };
    double span = 1.0;
    double lo = x_half - span;
    for (int k = 0; k < 60 && g(lo) > 0.0; ++k) {
        span *= 2.0;
        lo = x_half - span;
    }
    const double xi_star = bisect(g, lo, x_half, 1e-12, 1e-13);
    if (tail_mass(sc, xi_star) <= 1e-12) {
        throw std::runtime_error(
            "zero_profit_equilibrium: no finite root (no base mass in any profitable "
            "acceptance region)");
    }

    ZeroProfitSolution sol;
    sol.xi_star = xi_star;
    sol.theta_star = theta_from_xi(xi_star, sc.gamma, sc.cost);
    sol.conditional_mean_residual = std::abs(conditional_mean_residual(sc, xi_star));
    (void)hi_support;
    return sol;
}

double feasible_min_threshold(double theta_other, const CompetitionScenario& sc) {
    ZeroProfitSolution sol;
    try {
        sol = zero_profit_equilibrium(sc);
    } catch (const std::runtime_error&) {
        return kInf;  // acceptance is never profitable
    }
    if (sol.theta_star <= theta_other) return sol.theta_star;
    // Every deviation below theta_other runs a loss; the feasible set opens
    // just above the competitor, where the firm vacates the market at utility 0.
    return theta_other;
}

double competition_power_bound(double theta_min, double theta, const CompetitionScenario& sc,
                               double lipschitz) {
    if (theta_min > theta) {
        throw std::invalid_argument("competition_power_bound: requires theta_min <= theta");
    }
    if (theta_min == theta) return 0.0;
    const double xi_lo = xi_inverse(theta_min, sc.gamma, sc.cost);
    const double xi_hi = xi_inverse(theta, sc.gamma, sc.cost);
    const double p_reach = sc.base.cdf(xi_hi) - sc.base.cdf(xi_lo);
    return lipschitz * std::min(sc.cost.scalar(theta_min, theta), sc.gamma) +
           sc.gamma * lipschitz * p_reach;
}

ZeroPowerReport verify_zero_power(const CompetitionScenario& sc, double grid_span,
                                  int grid_points, int n_units, int n_rep, std::uint64_t seed) {
    ZeroPowerReport report;
    const ZeroProfitSolution sol = zero_profit_equilibrium(sc);
    report.theta_star = sol.theta_star;
    report.xi_star = sol.xi_star;

    // Population adapted to the symmetric (theta*, theta*) economy.
    auto eng = make_engine(derive_seed(seed, fnv1a("competition-population")));
    std::vector<double> x_orig(static_cast<std::size_t>(n_units));
    Population pop(static_cast<std::size_t>(n_units));
    for (int i = 0; i < n_units; ++i) {
        const double x = sc.base.sample(eng);
        x_orig[static_cast<std::size_t>(i)] = x;
        pop[static_cast<std::size_t>(i)] = Unit{
            i, DataPoint::scalar(best_response_1d(x, sol.theta_star, sc.gamma, sc.cost))};
    }

    const Grid grid{sol.theta_star, sol.theta_star + grid_span,
                    grid_points > 1 ? grid_span / static_cast<double>(grid_points - 1) : 1.0};
    const ThresholdActions actions = threshold_actions(grid);

    // Two-firm counterfactual: our firm deviates inside F+(theta*), the
    // competitor holds theta*; participants re-choose and adapt at budget gamma.
    auto respond_compete = [&sc, x_orig, theta_star = sol.theta_star,
                            thetas = actions.thetas](std::size_t ai, const Unit& u,
                                                     std::uint64_t s) {
        const double x = x_orig[static_cast<std::size_t>(u.id)];
        const double theta_dev = thetas.at(ai);
        const int choice = participant_choice(theta_dev, theta_star, x, sc.gamma, sc.cost, s);
        const double chosen = (choice == 1) ? theta_dev : theta_star;
        return DataPoint::scalar(best_response_1d(x, chosen, sc.gamma, sc.cost));
    };
    const CounterfactualSimulator compete_sim(pop, respond_compete);
    report.competition_power =
        estimate_power(compete_sim, actions.set, pop, Metric::absolute_difference(), n_rep, seed);

    // Monopoly control: competitor removed, same population and action grid.
    auto respond_mono = [&sc, x_orig, thetas = actions.thetas](std::size_t ai, const Unit& u,
                                                               std::uint64_t /*s*/) {
        const double x = x_orig[static_cast<std::size_t>(u.id)];
        return DataPoint::scalar(best_response_1d(x, thetas.at(ai), sc.gamma, sc.cost));
    };
    const CounterfactualSimulator mono_sim(pop, respond_mono);
    report.monopoly_control =
        estimate_power(mono_sim, actions.set, pop, Metric::absolute_difference(), n_rep, seed);

    report.bound_at_equilibrium = competition_power_bound(sol.theta_star, sol.theta_star, sc, 1.0);
    report.pass = report.competition_power.value <=
                  report.epsilon_zero + 3.0 * report.competition_power.ci_halfwidth;
    return report;
}

}  // namespace perfpower
