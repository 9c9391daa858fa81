#include <doctest.h>

#include <cmath>
#include <sstream>

#include "perfpower/ddd.hpp"
#include "perfpower/rng.hpp"

using namespace perfpower;

namespace {

RecommenderWorld two_item_world(double affinity, double m1, double m2) {
    // item 0 = empty slot, items 1..2 carry a shared affinity
    RecommenderWorld w;
    w.item_count = 3;
    w.m1 = m1;
    w.m2 = m2;
    w.base_click = {{0.0, affinity, affinity}};
    w.s_curr = {{0.0, 0.9, 0.8}};
    w.validate();
    return w;
}

}  // namespace

TEST_CASE("top_two orders by score, ties by index") {
    CHECK(top_two({0.1, 0.9, 0.8}) == std::pair<int, int>{1, 2});
    CHECK(top_two({0.9, 0.9, 0.1}) == std::pair<int, int>{0, 1});
    CHECK(top_two({0.2, 0.5, 0.5}) == std::pair<int, int>{1, 2});
}

TEST_CASE("consumption_histogram") {
    SUBCASE("zero affinity: all mass on no-consumption") {
        const RecommenderWorld w = two_item_world(0.0, 0.1, 0.05);
        const DataPoint h = consumption_histogram(w, 0, w.s_curr);
        CHECK(h.values == std::vector<double>{1.0, 0.0, 0.0});
    }
    SUBCASE("half affinity, multipliers (0.1, 0.05)") {
        const RecommenderWorld w = two_item_world(0.5, 0.1, 0.05);
        const DataPoint h = consumption_histogram(w, 0, w.s_curr);
        CHECK(h.values[1] == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(h.values[2] == doctest::Approx(0.025).epsilon(1e-12));
        CHECK(h.values[0] == doctest::Approx(0.925).epsilon(1e-12));
    }
    SUBCASE("equal multipliers: invariant under swapping the top scores") {
        RecommenderWorld w = two_item_world(0.5, 0.08, 0.08);
        const DataPoint before = consumption_histogram(w, 0, w.s_curr);
        const ScoreMatrix swapped = build_swap_action(w);
        const DataPoint after = consumption_histogram(w, 0, swapped);
        CHECK(l1_histogram_distance(before, after) <= 1e-15);
    }
    SUBCASE("histograms are simplex points on random worlds") {
        for (int t = 0; t < 500; ++t) {
            const RecommenderWorld w = make_random_world(20, 6, 1000 + static_cast<std::uint64_t>(t));
            for (int u = 0; u < w.n_viewers(); ++u) {
                const DataPoint h = consumption_histogram(w, u, w.s_curr);
                CHECK(is_simplex(h.values));
            }
        }
    }
}

TEST_CASE("build_swap_action") {
    const RecommenderWorld w = two_item_world(0.5, 0.1, 0.05);
    const ScoreMatrix swap = build_swap_action(w);
    CHECK(swap[0] == std::vector<double>{0.0, 0.8, 0.9});

    // Tied top scores: the swap is the identity up to relabeling and the
    // index-order tie rule keeps kappa well defined.
    RecommenderWorld tied = w;
    tied.s_curr = {{0.0, 0.7, 0.7}};
    const ScoreMatrix tswap = build_swap_action(tied);
    CHECK(tswap[0] == tied.s_curr[0]);
    CHECK(l1_histogram_distance(consumption_histogram(tied, 0, tied.s_curr),
                                consumption_histogram(tied, 0, tswap)) == 0.0);

    // kappa under the swap reverses kappa under s_curr for every viewer.
    const RecommenderWorld big = make_random_world(200, 8, 77);
    const ScoreMatrix swapped = build_swap_action(big);
    const double delta = score_delta(big);
    for (int u = 0; u < big.n_viewers(); ++u) {
        const auto before = top_two(big.s_curr[static_cast<std::size_t>(u)]);
        const auto after = top_two(swapped[static_cast<std::size_t>(u)]);
        CHECK(after.first == before.second);
        CHECK(after.second == before.first);
        // membership in the local perturbation set
        for (std::size_t i = 0; i < swapped[static_cast<std::size_t>(u)].size(); ++i) {
            CHECK(std::abs(swapped[static_cast<std::size_t>(u)][i] -
                           big.s_curr[static_cast<std::size_t>(u)][i]) <= delta + 1e-12);
        }
    }
}

TEST_CASE("no-interference holds by construction") {
    // Two score functions with equal kappa output give identical histograms.
    const RecommenderWorld w = make_random_world(50, 5, 91);
    ScoreMatrix rescaled = w.s_curr;
    for (auto& row : rescaled) {
        const auto [i1, i2] = top_two(row);
        (void)i1;
        (void)i2;
        for (auto& s : row) s = 2.0 * s + 1.0;  // monotone: same ranking
    }
    for (int u = 0; u < w.n_viewers(); ++u) {
        CHECK(top_two(w.s_curr[static_cast<std::size_t>(u)]) ==
              top_two(rescaled[static_cast<std::size_t>(u)]));
        const DataPoint a = consumption_histogram(w, u, w.s_curr);
        const DataPoint b = consumption_histogram(w, u, rescaled);
        CHECK(l1_histogram_distance(a, b) == 0.0);
    }
}

TEST_CASE("causal_effect_position") {
    SUBCASE("equal multipliers: no position effect") {
        const RecommenderWorld w = two_item_world(0.5, 0.08, 0.08);
        CHECK(causal_effect_position_exact(w).beta == 0.0);
    }
    SUBCASE("uniform 0.5 affinity, multipliers (0.1, 0.05): beta = 0.025") {
        const RecommenderWorld w = make_uniform_world(100, 4, 0.5, 0.1, 0.05, 3);
        const PositionEffect e = causal_effect_position_exact(w);
        CHECK(e.beta == doctest::Approx(0.025).epsilon(1e-12));
        CHECK(e.mean_abs_effect == doctest::Approx(0.025).epsilon(1e-12));
    }
    SUBCASE("heterogeneous affinities: absolute value sits outside the average") {
        const RecommenderWorld w = make_random_world(100, 5, 7);
        const PositionEffect e = causal_effect_position_exact(w);
        double signed_sum = 0.0, abs_sum = 0.0;
        for (int u = 0; u < w.n_viewers(); ++u) {
            const auto [i1, i2] = top_two(w.s_curr[static_cast<std::size_t>(u)]);
            (void)i2;
            const double diff =
                w.base_click[static_cast<std::size_t>(u)][static_cast<std::size_t>(i1)] *
                (w.m2 - w.m1);
            signed_sum += diff;
            abs_sum += std::abs(diff);
        }
        const double n = static_cast<double>(w.n_viewers());
        CHECK(e.beta == doctest::Approx(std::abs(signed_sum) / n).epsilon(1e-12));
        CHECK(e.mean_abs_effect == doctest::Approx(abs_sum / n).epsilon(1e-12));
    }
    SUBCASE("monte carlo path converges to the exact value") {
        const RecommenderWorld w = make_uniform_world(200, 4, 0.5, 0.1, 0.05, 5);
        const PositionEffect mc = causal_effect_position_mc(w, 400, 13);
        CHECK(std::abs(mc.beta - 0.025) <= 4.0 * mc.se);
    }
}

TEST_CASE("power_lower_bound_ddd") {
    SUBCASE("equal multipliers: zero effect, chain still holds") {
        const RecommenderWorld w = make_uniform_world(50, 4, 0.5, 0.08, 0.08, 17);
        const DddPowerReport rep = power_lower_bound_ddd(w, 50, 17);
        CHECK(rep.beta_exact == 0.0);
        CHECK(rep.chain_ok);
        CHECK(rep.pass);
    }
    SUBCASE("uniform world: exact chain P >= l1 >= coord = beta") {
        const RecommenderWorld w = make_uniform_world(100, 4, 0.5, 0.1, 0.05, 19);
        const DddPowerReport rep = power_lower_bound_ddd(w, 200, 19);
        CHECK(rep.beta_exact == doctest::Approx(0.025).epsilon(1e-12));
        CHECK(rep.l1_swap_effect == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(rep.power.value >= rep.l1_swap_effect - 1e-12);
        CHECK(rep.chain_ok);
        CHECK(rep.pass);
    }
    SUBCASE("50 random worlds: the theorem holds on both paths") {
        for (int t = 0; t < 50; ++t) {
            const RecommenderWorld w = make_random_world(60, 8, 3000 + static_cast<std::uint64_t>(t));
            const DddPowerReport rep = power_lower_bound_ddd(w, 100, 3000 + static_cast<std::uint64_t>(t));
            CHECK(rep.chain_ok);
            CHECK(rep.pass);
        }
    }
    SUBCASE("per-viewer chain: l1 shift dominates the top-coordinate shift") {
        const RecommenderWorld w = make_random_world(200, 6, 23);
        const ScoreMatrix swap = build_swap_action(w);
        for (int u = 0; u < w.n_viewers(); ++u) {
            const DataPoint zc = consumption_histogram(w, u, w.s_curr);
            const DataPoint zs = consumption_histogram(w, u, swap);
            const auto [i1, i2] = top_two(w.s_curr[static_cast<std::size_t>(u)]);
            (void)i2;
            const double coord = std::abs(zc.values[static_cast<std::size_t>(i1)] -
                                          zs.values[static_cast<std::size_t>(i1)]);
            CHECK(l1_histogram_distance(zc, zs) >= coord - 1e-15);
        }
    }
}

TEST_CASE("generate_logs") {
    LogModel model;
    model.n_keywords = 20;
    model.baseline_ctr = 0.0233;
    model.score_halfwidth = 0.5;

    SUBCASE("flat curve, no effect: click rates statistically identical across positions") {
        model.position_effect = 0.0;
        model.gamma1 = model.gamma2 = 0.0;
        const auto logs = generate_logs(model, 200000, 10.0, 0.0, 23);
        double c1 = 0, n1 = 0, c2 = 0, n2 = 0;
        for (const auto& log : logs) {
            if (log.position == 1) { c1 += log.click; n1 += 1; }
            else { c2 += log.click; n2 += 1; }
        }
        const double diff = c1 / n1 - c2 / n2;
        const double se = std::sqrt(0.0233 * (1 - 0.0233) * (1 / n1 + 1 / n2));
        CHECK(std::abs(diff) <= 3.0 * se);
    }
    SUBCASE("injected effect appears as the expected rate difference") {
        model.position_effect = 0.0048;
        model.gamma1 = model.gamma2 = 0.0;
        model.baseline_ctr = 0.023260;
        const auto logs = generate_logs(model, 2000000, 10.0, 0.0, 29);
        double c1 = 0, n1 = 0, c2 = 0, n2 = 0;
        for (const auto& log : logs) {
            if (log.position == 1) { c1 += log.click; n1 += 1; }
            else { c2 += log.click; n2 += 1; }
        }
        const double se1 = std::sqrt(0.0281 * (1 - 0.0281) / n1);
        const double se2 = std::sqrt(0.0233 * (1 - 0.0233) / n2);
        CHECK(std::abs(c2 / n2 - 0.023260) <= 3.0 * se2);
        CHECK(std::abs(c1 / n1 - 0.028060) <= 3.0 * se1);
    }
}

TEST_CASE("rdd_local_linear") {
    LogModel model;
    model.n_keywords = 15;
    model.baseline_ctr = 0.0233;
    model.score_halfwidth = 0.4;

    SUBCASE("binary-only design reproduces the difference in means exactly") {
        model.position_effect = 0.004;
        const auto logs = generate_logs(model, 50000, 5.0, 0.001, 31);
        const RddFit fit = rdd_local_linear(logs, 5.0, 0.4, false, RddDesign::BinaryOnly);
        double c1 = 0, n1 = 0, c2 = 0, n2 = 0;
        for (const auto& log : logs) {
            if (log.position == 1) { c1 += log.click; n1 += 1; }
            else { c2 += log.click; n2 += 1; }
        }
        CHECK(fit.xi == doctest::Approx(c1 / n1 - c2 / n2).epsilon(1e-12));
        CHECK(fit.alpha == doctest::Approx(c2 / n2).epsilon(1e-12));
    }
    SUBCASE("zero effect: estimate within three standard errors of zero") {
        model.position_effect = 0.0;
        model.gamma1 = 0.002;
        model.gamma2 = 0.001;
        const RddFit fit = rdd_fit_streamed(model, 1000000, 5.0, 0.002, 37, 0.4, true);
        CHECK(std::abs(fit.xi) <= 3.0 * fit.stderr_xi);
    }
    SUBCASE("recovers an injected effect at scale") {
        model.position_effect = 0.0048;
        model.gamma1 = 0.002;
        model.gamma2 = 0.001;
        const RddFit fit = rdd_fit_streamed(model, 1000000, 5.0, 0.002, 41, 0.4, true);
        CHECK(std::abs(fit.xi - 0.0048) <= 3.0 * fit.stderr_xi);
        CHECK(fit.n_left >= 10);
        CHECK(fit.n_right >= 10);
    }
    SUBCASE("streamed and materialized fits agree") {
        model.position_effect = 0.003;
        model.gamma1 = 0.001;
        const auto logs = generate_logs(model, 40000, 5.0, 0.002, 43);
        const RddFit a = rdd_local_linear(logs, 5.0, 0.4, true);
        const RddFit b = rdd_fit_streamed(model, 40000, 5.0, 0.002, 43, 0.4, true);
        CHECK(a.xi == doctest::Approx(b.xi).epsilon(1e-12));
        CHECK(a.stderr_xi == doctest::Approx(b.stderr_xi).epsilon(1e-12));
    }
    SUBCASE("error paths") {
        model.position_effect = 0.0;
        const auto logs = generate_logs(model, 1000, 5.0, 0.0, 47);
        CHECK_THROWS(rdd_local_linear(logs, 5.0, 1e-5, false));  // window too small
        auto one_sided = logs;
        for (auto& log : one_sided) {
            log.position = 1;
            log.score = 5.0 + std::abs(log.score - 5.0);
        }
        CHECK_THROWS(rdd_local_linear(one_sided, 5.0, 0.4, false));
    }
}

TEST_CASE("nk15_report") {
    RddFit fit;
    fit.xi = 0.0048;
    fit.stderr_xi = 1e-4;
    fit.n_obs = 1000;

    const Nk15Report a = nk15_report(fit, 0.023260);
    CHECK(a.beta_hat == 0.0048);
    CHECK(a.power_lower_bound == 0.0048);
    CHECK(a.relative_effect == doctest::Approx(0.2064).epsilon(1e-3));

    fit.xi = 0.0;
    CHECK(nk15_report(fit, 0.02).relative_effect == 0.0);

    fit.xi = 0.0048;
    CHECK(nk15_report(fit, 0.0096).relative_effect == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS(nk15_report(fit, 0.0));
}

TEST_CASE("log CSV round-trips bit-exactly") {
    LogModel model;
    model.n_keywords = 7;
    model.baseline_ctr = 0.1;
    model.position_effect = 0.01;
    const auto logs = generate_logs(model, 5000, 3.0, 0.01, 53);

    std::ostringstream out;
    write_logs_csv(out, logs);
    std::istringstream in(out.str());
    const auto back = read_logs_csv(in);

    REQUIRE(back.size() == logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) {
        CHECK(back[i].keyword_id == logs[i].keyword_id);
        CHECK(back[i].position == logs[i].position);
        CHECK(back[i].score == logs[i].score);  // bit-exact via 17 significant digits
        CHECK(back[i].click == logs[i].click);
    }

    std::istringstream bad("keyword,pos\n");
    CHECK_THROWS(read_logs_csv(bad));
}
