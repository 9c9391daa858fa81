#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "perfpower/competition.hpp"
#include "perfpower/rng.hpp"

using namespace perfpower;

namespace {

CompetitionScenario normal_scenario() {
    CompetitionScenario sc;
    sc.base = BaseDistribution{BaseDistribution::Family::Normal, -1.0, 1.0,
                               Posterior{Posterior::Kind::Logistic, 2.0, 0.0}};
    sc.gamma = 1.0;
    sc.alpha = 1.0;
    return sc;
}

}  // namespace

TEST_CASE("xi_inverse") {
    const CostModel abs = CostModel::absolute_difference();
    CHECK(xi_inverse(1.0, 1.0, abs) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(xi_inverse(-1.0, 1.0, abs) == doctest::Approx(-2.0).epsilon(1e-9));

    const CostModel quad = CostModel::quadratic_1d();
    CHECK(xi_inverse(0.0, 0.25, quad) == doctest::Approx(-0.5).epsilon(1e-8));

    SUBCASE("residual and ordering on random probes") {
        auto eng = make_engine(3);
        std::uniform_real_distribution<double> ut(-5.0, 5.0);
        std::uniform_real_distribution<double> ub(0.01, 4.0);
        for (int t = 0; t < 1000; ++t) {
            const double theta = ut(eng);
            const double budget = ub(eng);
            for (const CostModel& c : {abs, quad}) {
                const double xi = xi_inverse(theta, budget, c);
                CHECK(xi < theta);
                CHECK(std::abs(c.scalar(xi, theta) - budget) <= 1e-9);
            }
        }
    }
    SUBCASE("monotone in theta") {
        double prev = xi_inverse(-3.0, 1.3, quad);
        for (double theta = -2.5; theta <= 3.0; theta += 0.5) {
            const double xi = xi_inverse(theta, 1.3, quad);
            CHECK(xi > prev);
            prev = xi;
        }
    }
    SUBCASE("bad budget throws") { CHECK_THROWS(xi_inverse(0.0, 0.0, abs)); }
}

TEST_CASE("participant_choice") {
    const CostModel c = CostModel::absolute_difference();
    SUBCASE("lower threshold weakly dominates") {
        for (double x : {-5.0, -0.4, 0.5, 1.5, 7.0}) {
            CHECK(participant_choice(0.0, 1.0, x, 1.0, c, 5) == 1);
            CHECK(participant_choice(2.0, 1.0, x, 1.0, c, 5) == 2);
        }
    }
    SUBCASE("equal thresholds: fair coin") {
        int firm1 = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            if (participant_choice(0.5, 0.5, 0.0, 1.0, c,
                                   derive_seed(7, static_cast<std::uint64_t>(i))) == 1) {
                ++firm1;
            }
        }
        // binomial 3-sigma band around n/2
        const double sigma = std::sqrt(0.25 * n);
        CHECK(std::abs(firm1 - n / 2) <= 3.0 * sigma);
    }
}

TEST_CASE("zero_profit_equilibrium") {
    SUBCASE("normal base: independent oracle agrees and profits vanish") {
        const CompetitionScenario sc = normal_scenario();
        const ZeroProfitSolution sol = zero_profit_equilibrium(sc);
        CHECK(sol.conditional_mean_residual <= 1e-9);
        CHECK(sol.theta_star == doctest::Approx(sol.xi_star + sc.gamma).epsilon(1e-9));

        // Independent oracle: conditional mean via trapezoid sums on a fine
        // grid, root by plain interval halving.
        auto cond_mean = [&sc](double xi) {
            const int n = 200000;
            const double hi = sc.base.a + 12.0 * sc.base.b;
            const double h = (hi - xi) / n;
            double num = 0.0, den = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double x = xi + i * h;
                const double w = (i == 0 || i == n) ? 0.5 : 1.0;
                num += w * sc.base.pdf(x) * sc.base.posterior(x);
                den += w * sc.base.pdf(x);
            }
            return num / den;
        };
        double lo = -6.0, hi = 0.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (cond_mean(mid) < 0.5) lo = mid; else hi = mid;
        }
        CHECK(sol.xi_star == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-5));

        const FirmUtilityEstimate u =
            firm_utility(sol.theta_star, sol.theta_star, sc, 1000000, 11);
        CHECK(std::abs(u.mean) <= 3.0 * u.se);
        CHECK(std::abs(firm_utility_quadrature(sol.theta_star, sol.theta_star, sc)) <= 1e-10);
    }
    SUBCASE("symmetric base and posterior: no finite root") {
        CompetitionScenario sc;
        sc.base = BaseDistribution{BaseDistribution::Family::Normal, 0.0, 1.0,
                                   Posterior{Posterior::Kind::Logistic, 1.0, 0.0}};
        CHECK_THROWS_AS(zero_profit_equilibrium(sc), std::runtime_error);
    }
}

TEST_CASE("firm_utility") {
    const CompetitionScenario sc = normal_scenario();
    const ZeroProfitSolution sol = zero_profit_equilibrium(sc);

    SUBCASE("higher threshold loses every participant") {
        const FirmUtilityEstimate u =
            firm_utility(sol.theta_star + 0.4, sol.theta_star, sc, 50000, 13);
        CHECK(u.mean == 0.0);
        CHECK(firm_utility_quadrature(sol.theta_star + 0.4, sol.theta_star, sc) == 0.0);
    }
    SUBCASE("undercutting a profitable symmetric state approaches twice the utility") {
        const double theta = sol.theta_star + 0.5;  // profitable symmetric threshold
        const double u_sym = firm_utility_quadrature(theta, theta, sc);
        CHECK(u_sym > 0.0);
        const double u_dev = firm_utility_quadrature(theta - 1e-4, theta, sc);
        CHECK(u_dev == doctest::Approx(2.0 * u_sym).epsilon(1e-2));
    }
    SUBCASE("monte carlo agrees with quadrature") {
        for (double theta : {sol.theta_star, sol.theta_star + 0.5}) {
            const FirmUtilityEstimate mc = firm_utility(theta, theta, sc, 400000, 17);
            const double quad = firm_utility_quadrature(theta, theta, sc);
            CHECK(std::abs(mc.mean - quad) <= 4.0 * mc.se);
        }
    }
    SUBCASE("alpha scales the utility without moving the equilibrium") {
        CompetitionScenario s2 = normal_scenario();
        for (double alpha : {0.5, 2.0}) {
            s2.alpha = alpha;
            const ZeroProfitSolution sol2 = zero_profit_equilibrium(s2);
            CHECK(sol2.theta_star == doctest::Approx(sol.theta_star).epsilon(1e-10));
            const FirmUtilityEstimate base_u =
                firm_utility(sol.theta_star + 0.5, sol.theta_star + 0.5, sc, 100000, 19);
            const FirmUtilityEstimate scaled =
                firm_utility(sol.theta_star + 0.5, sol.theta_star + 0.5, s2, 100000, 19);
            CHECK(scaled.mean == doctest::Approx(alpha * base_u.mean).epsilon(1e-12));
        }
    }
}

TEST_CASE("feasible_min_threshold") {
    const CompetitionScenario sc = normal_scenario();
    const ZeroProfitSolution sol = zero_profit_equilibrium(sc);

    CHECK(std::abs(feasible_min_threshold(sol.theta_star, sc) - sol.theta_star) <= 1e-6);
    CHECK(feasible_min_threshold(sol.theta_star + 2.0, sc) <
          sol.theta_star + 2.0);  // undercuts an uncompetitive rival
    CHECK(feasible_min_threshold(sol.theta_star + 2.0, sc) ==
          doctest::Approx(sol.theta_star).epsilon(1e-6));

    SUBCASE("degenerate all-negative-label base: +inf sentinel") {
        CompetitionScenario deg;
        deg.base = BaseDistribution{BaseDistribution::Family::Uniform, -100.0, -90.0,
                                    Posterior{Posterior::Kind::Logistic, 1.0, 0.0}};
        CHECK(std::isinf(feasible_min_threshold(0.0, deg)));
    }
}

TEST_CASE("competition_power_bound") {
    CompetitionScenario sc;
    sc.base = BaseDistribution{BaseDistribution::Family::Uniform, -2.0, 2.0,
                               Posterior{Posterior::Kind::Logistic, 4.0, 0.0}};
    sc.gamma = 1.0;

    CHECK(competition_power_bound(0.7, 0.7, sc, 1.0) == 0.0);

    // Reach interval [xi(theta_min), xi(theta)] = [-0.5, 0.0] has uniform
    // density 1/4: bound = min(0.5, 1) + 1 * 1 * 0.125.
    CHECK(competition_power_bound(0.5, 1.0, sc, 1.0) == doctest::Approx(0.625).epsilon(1e-9));

    // Distance beyond the budget saturates the first term at gamma * L.
    const double b = competition_power_bound(-1.0, 1.0, sc, 1.0);
    const double p_reach = sc.base.cdf(0.0) - sc.base.cdf(-2.0);
    CHECK(b == doctest::Approx(sc.gamma * 1.0 + sc.gamma * p_reach).epsilon(1e-9));

    CHECK_THROWS(competition_power_bound(1.0, 0.5, sc, 1.0));
}

TEST_CASE("power bound dominates the estimate at a symmetric state") {
    const CompetitionScenario sc = normal_scenario();
    const ZeroProfitSolution sol = zero_profit_equilibrium(sc);
    const double theta = sol.theta_star + 0.3;  // any symmetric state
    const double theta_min = theta - 0.8;

    auto eng = make_engine(23);
    const int n_units = 20000;
    std::vector<double> x_orig(n_units);
    Population pop(n_units);
    for (int i = 0; i < n_units; ++i) {
        x_orig[static_cast<std::size_t>(i)] = sc.base.sample(eng);
        pop[static_cast<std::size_t>(i)] =
            Unit{i, DataPoint::scalar(best_response_1d(x_orig[static_cast<std::size_t>(i)], theta,
                                                       sc.gamma, sc.cost))};
    }
    const ThresholdActions actions = threshold_actions(Grid{theta_min, theta, 0.05});
    const CounterfactualSimulator sim(
        pop, [&sc, &x_orig, theta, thetas = actions.thetas](std::size_t ai, const Unit& u,
                                                            std::uint64_t s) {
            const double x = x_orig[static_cast<std::size_t>(u.id)];
            const double dev = thetas.at(ai);
            const int choice = participant_choice(dev, theta, x, sc.gamma, sc.cost, s);
            const double chosen = (choice == 1) ? dev : theta;
            return DataPoint::scalar(best_response_1d(x, chosen, sc.gamma, sc.cost));
        });
    const PowerEstimate p =
        estimate_power(sim, actions.set, pop, Metric::absolute_difference(), 2, 29);
    const double bound = competition_power_bound(theta_min, theta, sc, 1.0);
    CHECK(p.value <= bound + 3.0 * p.ci_halfwidth + 1e-9);
}

TEST_CASE("verify_zero_power") {
    const CompetitionScenario sc = normal_scenario();
    const ZeroPowerReport rep = verify_zero_power(sc, 2.0, 41, 20000, 2, 31);

    CHECK(rep.pass);
    CHECK(rep.competition_power.value == 0.0);  // exact on this simulator
    CHECK(rep.bound_at_equilibrium == 0.0);
    CHECK(rep.monopoly_control.value > 0.1);  // the same population under a monopoly moves

    SUBCASE("deviation scan: no profitable feasible deviation, losses below theta*") {
        for (int k = 0; k < 50; ++k) {
            const double theta = rep.theta_star + 0.04 * k;
            CHECK(firm_utility_quadrature(theta, rep.theta_star, sc) <= 1e-10);
        }
        for (double theta : {rep.theta_star - 0.3, rep.theta_star - 0.1}) {
            CHECK(firm_utility_quadrature(theta, rep.theta_star, sc) < -1e-6);
        }
    }
    SUBCASE("singleton action grid: null deviation has exactly zero power") {
        const ZeroPowerReport single = verify_zero_power(sc, 0.0, 1, 2000, 2, 31);
        CHECK(single.competition_power.value == 0.0);
    }
}
