#include <doctest.h>

#include <cmath>
#include <optional>

#include "perfpower/economy.hpp"
#include "perfpower/perfpred.hpp"
#include "perfpower/rng.hpp"

using namespace perfpower;

namespace {

LossSpec squared_loss(double lz = 20.0) { return LossSpec{LossSpec::Kind::Squared, lz, 2.0}; }
LossSpec zero_one_loss() { return LossSpec{LossSpec::Kind::ZeroOne, 1.0, 0.0}; }

Strategic1dMap example_map(double delta_gamma) {
    const BaseDistribution base{BaseDistribution::Family::Uniform, -2.0, 2.0,
                                Posterior{Posterior::Kind::Logistic, 4.0, 0.0}};
    return Strategic1dMap(base, UtilitySpec{delta_gamma, 0.0}, zero_one_loss());
}

// Degenerate data: every draw is x = 1, y = 1, so a threshold at 0 is always
// correct.
class DegenerateMap : public DistributionMap {
  public:
    explicit DegenerateMap(LossSpec loss) { loss_ = loss; }
    Obs draw_base(std::uint64_t) const override { return Obs{1.0, 1.0}; }
    Obs apply(const Obs& base, std::optional<double>, std::uint64_t) const override {
        return base;
    }
    double z_of(const Obs& o) const override { return o.x; }
};

}  // namespace

TEST_CASE("performative_risk: location-shift closed forms") {
    SUBCASE("no performativity: risk at mu0 is the noise variance") {
        const LocationShiftMap map(1.0, 0.0, 1.0, squared_loss());
        const double pr = performative_risk(1.0, map, 200000, 11);
        CHECK(pr == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("eps = 0.5, mu0 = 1: PR(theta) = (0.5 theta - 1)^2 + sigma^2, minimized at 2") {
        const LocationShiftMap map(1.0, 0.5, 1.0, squared_loss());
        for (double theta : {0.0, 1.0, 2.0, 3.0}) {
            const double expect = std::pow((1.0 - 0.5) * theta - 1.0, 2) + 1.0;
            CHECK(performative_risk(theta, map, 200000, 17) ==
                  doctest::Approx(expect).epsilon(0.03));
            CHECK(map.exact_decoupled_risk(theta, theta, map.loss()) ==
                  doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("always-correct predictor on degenerate data") {
        const DegenerateMap map(zero_one_loss());
        CHECK(performative_risk(0.0, map, 1000, 3) == 0.0);
    }
}

TEST_CASE("decoupled_risk") {
    const LocationShiftMap map(1.0, 0.5, 1.0, squared_loss());

    SUBCASE("phi = theta reproduces the performative risk bit-exactly") {
        for (double theta : {0.3, 1.7}) {
            CHECK(decoupled_risk(theta, theta, map, 50000, 23) ==
                  performative_risk(theta, map, 50000, 23));
        }
    }
    SUBCASE("closed form (theta - mu0 - eps phi)^2 + sigma^2") {
        const double got = decoupled_risk(2.0, 1.0, map, 200000, 29);
        const double expect = std::pow(1.0 - 1.0 - 0.5 * 2.0, 2) + 1.0;
        CHECK(got == doctest::Approx(expect).epsilon(0.03));
    }
    SUBCASE("decomposition tautology holds bit-exactly under shared seeds") {
        const double phi = 0.8, theta = 1.9;
        const double r_phi = decoupled_risk(phi, theta, map, 50000, 31);
        const double pr = performative_risk(theta, map, 50000, 31);
        const double recomposed = r_phi + (decoupled_risk(theta, theta, map, 50000, 31) - r_phi);
        CHECK(recomposed == pr);
    }
}

TEST_CASE("ex_ante_optimize") {
    SUBCASE("location-shift: minimizer follows the deployed shift") {
        const LocationShiftMap map(1.0, 0.5, 1.0, squared_loss());
        const Grid grid{-1.0, 4.0, 0.01};
        const OptimResult r = ex_ante_optimize(2.0, map, grid, 200000, 41);
        CHECK(r.theta == doctest::Approx(2.0).epsilon(0.01));  // mu0 + eps*phi
        CHECK_FALSE(r.on_boundary);
    }
    SUBCASE("strategic base distribution recovers the posterior crossing") {
        const Strategic1dMap map = example_map(1.0);
        const Grid grid{-3.0, 3.0, 0.01};
        const double exact = ex_ante_optimize_exact(std::nullopt, map, grid).theta;
        CHECK(std::abs(exact - solve_theta_sl(map.base())) <= grid.step + 1e-12);
        const OptimResult mc = ex_ante_optimize(std::nullopt, map, grid, 200000, 43);
        CHECK(std::abs(mc.theta - exact) <= 0.06);  // cube-root MC wobble around a flat minimum
    }
    SUBCASE("eps = 0: ex-ante equals ex-post exactly") {
        const LocationShiftMap map(1.0, 0.0, 1.0, squared_loss());
        const Grid grid{-1.0, 3.0, 0.01};
        CHECK(ex_ante_optimize(std::nullopt, map, grid, 50000, 47).theta ==
              ex_post_optimize(map, grid, 50000, 47).theta);
    }
}

TEST_CASE("ex_post_optimize") {
    SUBCASE("strategic: ex-post threshold sits one budget above ex-ante, exactly on the grid") {
        for (double dg : {0.25, 0.5, 1.0}) {
            const Strategic1dMap map = example_map(dg);
            const Grid grid{-3.0, 3.0, 0.01};
            const double sl = ex_ante_optimize(std::nullopt, map, grid, 100000, 53).theta;
            const double po = ex_post_optimize(map, grid, 100000, 53).theta;
            // Common random numbers make the identity exact on aligned grids.
            CHECK(po - sl == doctest::Approx(dg).epsilon(1e-12));

            const double sl_exact = ex_ante_optimize_exact(std::nullopt, map, grid).theta;
            const double po_exact = ex_post_optimize_exact(map, grid).theta;
            CHECK(std::abs((po_exact - sl_exact) - dg) <= grid.step + 1e-12);
        }
    }
    SUBCASE("location-shift: performative optimum at mu0 / (1 - eps)") {
        const LocationShiftMap map(1.0, 0.5, 1.0, squared_loss());
        const Grid grid{-1.0, 4.0, 0.01};
        CHECK(ex_post_optimize(map, grid, 200000, 59).theta == doctest::Approx(2.0).epsilon(0.01));
        CHECK(ex_post_optimize_exact(map, grid).theta == doctest::Approx(2.0).epsilon(1e-9));
    }
}

TEST_CASE("strategic exact risk path agrees with Monte Carlo") {
    const Strategic1dMap map = example_map(1.0);
    for (const auto& [phi, theta] : std::vector<std::pair<std::optional<double>, double>>{
             {std::nullopt, 0.4}, {0.7, 0.4}, {1.0, 1.0}, {-0.5, 0.2}}) {
        const MeanSe mc = decoupled_risk_se(phi, theta, map, 400000, 61);
        const double exact = map.exact_decoupled_risk(phi, theta, map.loss());
        CHECK(std::abs(mc.mean - exact) <= 4.0 * mc.se);
    }
}

TEST_CASE("check_prop_sl") {
    SUBCASE("non-performative map: zero gap, zero distance") {
        const LocationShiftMap map(1.0, 0.0, 1.0, squared_loss());
        const Grid grid{-1.0, 3.0, 0.01};
        const PowerEstimate power = monopoly_power_at(map, std::nullopt, grid, 5000, 4, 67);
        CHECK(power.value <= 1e-12);  // eps = 0: deployments never move the data
        const PropSlReport rep = check_prop_sl(map, grid, power, map.loss(), 100000, 67);
        CHECK(rep.all_pass);
        for (const auto& c : rep.cases) {
            CHECK(c.dist_checked);
            CHECK(c.param_dist <= grid.step + 1e-9);
        }
    }
    SUBCASE("strategic 1-d, zero-one loss") {
        const Strategic1dMap map = example_map(1.0);
        const Grid grid{-3.0, 3.0, 0.01};
        const PowerEstimate power = monopoly_power_at(map, std::nullopt, grid, 20000, 2, 71);
        const PropSlReport rep = check_prop_sl(map, grid, power, map.loss(), 100000, 71);
        CHECK(rep.all_pass);
        for (const auto& c : rep.cases) CHECK_FALSE(c.dist_checked);  // gamma_sc = 0
    }
    SUBCASE("location-shift, eps = 0.5: risk gap against the closed-form bound") {
        const LocationShiftMap map(1.0, 0.5, 1.0, squared_loss());
        const Grid grid{-1.0, 4.0, 0.01};
        const PowerEstimate power = monopoly_power_at(map, std::nullopt, grid, 5000, 4, 73);
        // Power of the location-shift family: eps * max |theta| over the grid.
        CHECK(power.value == doctest::Approx(0.5 * 4.0).epsilon(1e-9));
        const PropSlReport rep = check_prop_sl(map, grid, power, map.loss(), 100000, 73);
        CHECK(rep.all_pass);
        // phi = base: theta_sl = mu0, theta_po = 2, closed-form gap below bound.
        const double gap = map.exact_decoupled_risk(1.0, 1.0, map.loss()) -
                           map.exact_decoupled_risk(2.0, 2.0, map.loss());
        CHECK(gap <= 4.0 * map.loss().lipschitz_z * power.value);
        for (const auto& c : rep.cases) CHECK(c.dist_checked);
    }
}

TEST_CASE("argmin is stable across seeds under common random numbers") {
    const LocationShiftMap map(1.0, 0.5, 0.5, squared_loss());
    const Grid grid{0.0, 4.0, 0.01};
    double lo = 1e300, hi = -1e300;
    for (int s = 0; s < 20; ++s) {
        const double theta =
            ex_post_optimize(map, grid, 300000, 1000 + static_cast<std::uint64_t>(s)).theta;
        lo = std::min(lo, theta);
        hi = std::max(hi, theta);
    }
    CHECK(hi - lo <= grid.step + 1e-12);
}

TEST_CASE("risk inequality chain under shared seeds") {
    const Strategic1dMap map = example_map(0.5);
    const Grid grid{-3.0, 3.0, 0.01};
    const int n = 100000;
    const std::uint64_t seed = 83;
    const double sl = ex_ante_optimize(std::nullopt, map, grid, n, seed).theta;
    const double po = ex_post_optimize(map, grid, n, seed).theta;
    // Same draws evaluate both risks, so the optimizer ordering is exact.
    CHECK(performative_risk(po, map, n, seed) <= performative_risk(sl, map, n, seed));
}

TEST_CASE("empirical loss lipschitz probes stay below the declared constant") {
    const LocationShiftMap map(1.0, 0.5, 1.0, squared_loss(20.0));
    std::vector<Obs> draws;
    for (int i = 0; i < 2000; ++i) {
        draws.push_back(map.draw(1.5, derive_seed(89, static_cast<std::uint64_t>(i))));
    }
    // Squared loss on |z| <= ~6, theta <= 4: |dl/dz| <= 2(4 + 6) = 20.
    const double ratio = empirical_loss_lipschitz(map.loss(), 4.0, draws, false);
    CHECK(ratio <= 20.0);
    CHECK(ratio > 0.0);
}

TEST_CASE("optimizer edge cases") {
    const LocationShiftMap map(1.0, 0.5, 1.0, squared_loss());
    SUBCASE("boundary minimizer is flagged") {
        const Grid grid{-3.0, 0.5, 0.01};  // true optimum (2.0) lies beyond the grid
        CHECK(ex_post_optimize(map, grid, 20000, 97).on_boundary);
    }
    SUBCASE("bad n throws") {
        CHECK_THROWS(performative_risk(1.0, map, 0, 1));
    }
}
