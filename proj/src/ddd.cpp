#include "perfpower/ddd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "perfpower/rng.hpp"
#include "perfpower/stats.hpp"

namespace perfpower {

void RecommenderWorld::validate() const {
    if (item_count < 2) throw std::invalid_argument("RecommenderWorld: need at least 2 items");
    if (!(m1 >= m2 && m2 >= 0.0 && m1 + m2 <= 1.0)) {
        throw std::invalid_argument("RecommenderWorld: slot multipliers need m1 >= m2 >= 0, m1+m2 <= 1");
    }
    if (base_click.size() != s_curr.size()) {
        throw std::invalid_argument("RecommenderWorld: base_click / s_curr viewer mismatch");
    }
    for (const auto& row : base_click) {
        if (static_cast<int>(row.size()) != item_count) {
            throw std::invalid_argument("RecommenderWorld: base_click row length mismatch");
        }
        if (row[0] != 0.0) {
            throw std::invalid_argument("RecommenderWorld: item 0 is the empty slot, affinity must be 0");
        }
        for (double v : row) {
            if (v < 0.0 || v > 1.0) {
                throw std::invalid_argument("RecommenderWorld: affinities must lie in [0,1]");
            }
        }
    }
    for (const auto& row : s_curr) {
        if (static_cast<int>(row.size()) != item_count) {
            throw std::invalid_argument("RecommenderWorld: score row length mismatch");
        }
    }
}

RecommenderWorld make_uniform_world(int n_viewers, int item_count, double affinity, double m1,
                                    double m2, std::uint64_t seed) {
    RecommenderWorld w;
    w.item_count = item_count;
    w.m1 = m1;
    w.m2 = m2;
    w.base_click.assign(static_cast<std::size_t>(n_viewers),
                        std::vector<double>(static_cast<std::size_t>(item_count), affinity));
    auto eng = make_engine(derive_seed(seed, fnv1a("uniform-world-scores")));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    w.s_curr.assign(static_cast<std::size_t>(n_viewers),
                    std::vector<double>(static_cast<std::size_t>(item_count), 0.0));
    for (auto& brow : w.base_click) brow[0] = 0.0;
    for (auto& srow : w.s_curr) {
        for (auto& s : srow) s = u01(eng);
        srow[0] = -1.0;  // never rank the empty slot
    }
    w.validate();
    return w;
}

RecommenderWorld make_random_world(int n_viewers, int item_count, std::uint64_t seed) {
    RecommenderWorld w;
    w.item_count = item_count;
    auto eng = make_engine(derive_seed(seed, fnv1a("random-world")));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    w.m2 = 0.5 * u01(eng);
    w.m1 = w.m2 + u01(eng) * (1.0 - 2.0 * w.m2);
    w.base_click.assign(static_cast<std::size_t>(n_viewers),
                        std::vector<double>(static_cast<std::size_t>(item_count), 0.0));
    w.s_curr = w.base_click;
    for (int u = 0; u < n_viewers; ++u) {
        for (int i = 0; i < item_count; ++i) {
            if (i > 0) w.base_click[static_cast<std::size_t>(u)][static_cast<std::size_t>(i)] = u01(eng);
            w.s_curr[static_cast<std::size_t>(u)][static_cast<std::size_t>(i)] = u01(eng);
        }
    }
    w.validate();
    return w;
}

std::pair<int, int> top_two(const std::vector<double>& scores) {
    if (scores.size() < 2) throw std::invalid_argument("top_two: need at least 2 scores");
    int first = 0;
    for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
        if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(first)]) first = i;
    }
    int second = (first == 0) ? 1 : 0;
    for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
        if (i == first) continue;
        if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(second)]) second = i;
    }
    return {first, second};
}

DataPoint consumption_histogram(const RecommenderWorld& world, int viewer,
                                const ScoreMatrix& score_fn) {
    const auto& scores = score_fn.at(static_cast<std::size_t>(viewer));
    const auto [i1, i2] = top_two(scores);
    const auto& base = world.base_click[static_cast<std::size_t>(viewer)];
    const double a = base[static_cast<std::size_t>(i1)] * world.m1;
    const double b = base[static_cast<std::size_t>(i2)] * world.m2;
    if (a < 0.0 || b < 0.0 || a + b > 1.0) {
        throw std::runtime_error("consumption_histogram: click probabilities outside [0,1]");
    }
    std::vector<double> probs(static_cast<std::size_t>(world.item_count), 0.0);
    probs[static_cast<std::size_t>(i1)] += a;
    probs[static_cast<std::size_t>(i2)] += b;
    probs[0] += 1.0 - a - b;
    return DataPoint::histogram(std::move(probs));
}

double score_delta(const RecommenderWorld& world) {
    double delta = 0.0;
    for (const auto& srow : world.s_curr) {
        const auto [i1, i2] = top_two(srow);
        delta = std::max(delta, srow[static_cast<std::size_t>(i1)] - srow[static_cast<std::size_t>(i2)]);
    }
    return delta;
}

ScoreMatrix build_swap_action(const RecommenderWorld& world) {
    const double delta = score_delta(world);
    ScoreMatrix swapped = world.s_curr;
    for (auto& srow : swapped) {
        const auto [i1, i2] = top_two(srow);
        std::swap(srow[static_cast<std::size_t>(i1)], srow[static_cast<std::size_t>(i2)]);
    }
    // Membership in the local perturbation set S.
    for (std::size_t u = 0; u < swapped.size(); ++u) {
        for (std::size_t i = 0; i < swapped[u].size(); ++i) {
            if (std::abs(swapped[u][i] - world.s_curr[u][i]) > delta + 1e-12) {
                throw std::logic_error("build_swap_action: swap left the perturbation set");
            }
        }
    }
    return swapped;
}

PositionEffect causal_effect_position_exact(const RecommenderWorld& world) {
    PositionEffect out;
    const int n = world.n_viewers();
    std::vector<double> effects(static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u) {
        const auto [i1, i2] = top_two(world.s_curr[static_cast<std::size_t>(u)]);
        (void)i2;
        const double base = world.base_click[static_cast<std::size_t>(u)][static_cast<std::size_t>(i1)];
        effects[static_cast<std::size_t>(u)] = base * (world.m2 - world.m1);
    }
    out.beta = std::abs(mean(effects));
    for (double& e : effects) e = std::abs(e);
    out.mean_abs_effect = mean(effects);
    out.se = 0.0;
    return out;
}

PositionEffect causal_effect_position_mc(const RecommenderWorld& world, int n_rep,
                                         std::uint64_t seed) {
    if (n_rep < 1) throw std::invalid_argument("causal_effect_position_mc: n_rep must be >= 1");
    const int n = world.n_viewers();
    std::vector<double> rep_means(static_cast<std::size_t>(n_rep));
    std::vector<double> viewer_sums(static_cast<std::size_t>(n), 0.0);
    std::vector<double> diffs(static_cast<std::size_t>(n));
    for (int r = 0; r < n_rep; ++r) {
        for (int u = 0; u < n; ++u) {
            const auto [i1, i2] = top_two(world.s_curr[static_cast<std::size_t>(u)]);
            (void)i2;
            const double base =
                world.base_click[static_cast<std::size_t>(u)][static_cast<std::size_t>(i1)];
            auto eng = make_engine(derive_seed(seed, static_cast<std::uint64_t>(u),
                                               static_cast<std::uint64_t>(r)));
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            const double y0 = (u01(eng) < base * world.m1) ? 1.0 : 0.0;
            const double y1 = (u01(eng) < base * world.m2) ? 1.0 : 0.0;
            diffs[static_cast<std::size_t>(u)] = y1 - y0;
            viewer_sums[static_cast<std::size_t>(u)] += y1 - y0;
        }
        rep_means[static_cast<std::size_t>(r)] = mean(diffs);
    }
    const MeanSe ms = mean_se(rep_means);
    PositionEffect out;
    out.beta = std::abs(ms.mean);
    out.se = ms.se;
    for (double& s : viewer_sums) s = std::abs(s / static_cast<double>(n_rep));
    out.mean_abs_effect = mean(viewer_sums);
    return out;
}

DddPowerReport power_lower_bound_ddd(const RecommenderWorld& world, int n_rep,
                                     std::uint64_t seed, int n_perturb_actions) {
    world.validate();
    DddPowerReport report;
    const int n = world.n_viewers();
    const double delta = score_delta(world);

    std::vector<ScoreMatrix> actions;
    ActionSet set;
    actions.push_back(world.s_curr);
    set.labels.push_back("s_curr");
    actions.push_back(build_swap_action(world));
    set.labels.push_back("s_swap");
    for (int k = 0; k < n_perturb_actions; ++k) {
        auto eng = make_engine(derive_seed(seed, fnv1a("s-perturbation"), static_cast<std::uint64_t>(k)));
        std::uniform_real_distribution<double> jitter(-delta, delta);
        ScoreMatrix pert = world.s_curr;
        for (auto& row : pert) {
            for (auto& s : row) s += jitter(eng);
        }
        actions.push_back(std::move(pert));
        set.labels.push_back("perturb-" + std::to_string(k));
    }

    Population pop(static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u) {
        pop[static_cast<std::size_t>(u)] = Unit{u, consumption_histogram(world, u, world.s_curr)};
    }
    auto respond = [&world, actions](std::size_t ai, const Unit& u, std::uint64_t /*s*/) {
        return consumption_histogram(world, u.id, actions.at(ai));
    };
    const CounterfactualSimulator sim(pop, respond);
    report.power = estimate_power(sim, set, pop, Metric::l1_histogram(), std::max(1, n_rep), seed);

    // Chain of the lower-bound argument, on exact probabilities.
    const ScoreMatrix& swap = actions[1];
    std::vector<double> l1_terms(static_cast<std::size_t>(n));
    std::vector<double> coord_terms(static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u) {
        const DataPoint zc = consumption_histogram(world, u, world.s_curr);
        const DataPoint zs = consumption_histogram(world, u, swap);
        l1_terms[static_cast<std::size_t>(u)] = l1_histogram_distance(zc, zs);
        const auto [i1, i2] = top_two(world.s_curr[static_cast<std::size_t>(u)]);
        (void)i2;
        coord_terms[static_cast<std::size_t>(u)] =
            std::abs(zc.values[static_cast<std::size_t>(i1)] - zs.values[static_cast<std::size_t>(i1)]);
    }
    report.l1_swap_effect = mean(l1_terms);
    report.coord_effect = mean(coord_terms);

    const PositionEffect exact = causal_effect_position_exact(world);
    report.beta_exact = exact.beta;
    const PositionEffect mc = causal_effect_position_mc(world, std::max(2, n_rep), seed);
    report.beta_mc = mc.beta;
    report.beta_mc_se = mc.se;

    const double tol = 1e-12;
    report.chain_ok = report.power.value >= report.l1_swap_effect - tol &&
                      report.l1_swap_effect >= report.coord_effect - tol &&
                      report.coord_effect >= report.beta_exact - tol;
    report.pass = report.power.value >= report.beta_mc - 3.0 * report.beta_mc_se;
    return report;
}

namespace {

struct LogRowGen {
    LogModel model;
    double threshold = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> kw_effects;  // demeaned

    LogRowGen(const LogModel& m, double thr, double noise, std::uint64_t s)
        : model(m), threshold(thr), seed(s) {
        kw_effects.resize(static_cast<std::size_t>(m.n_keywords), 0.0);
        if (noise > 0.0) {
            auto eng = make_engine(derive_seed(s, fnv1a("keyword-effects")));
            std::normal_distribution<double> g(0.0, noise);
            for (auto& e : kw_effects) e = g(eng);
            const double m_bar = mean(kw_effects);
            for (auto& e : kw_effects) e -= m_bar;
        }
    }

    // Counter-based draws: one splitmix step per variate instead of a full
    // engine per row, which keeps tens of millions of rows cheap to regenerate.
    static double u01(std::uint64_t h) {
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    }

    ImpressionLog row(std::int64_t i) const {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
        ImpressionLog log;
        log.keyword_id = static_cast<int>(splitmix64(s ^ 0x6b79774f5d7c1165ULL) %
                                          static_cast<std::uint64_t>(model.n_keywords));
        const double offset =
            (2.0 * u01(splitmix64(s ^ 0x2545f4914f6cdd1dULL)) - 1.0) * model.score_halfwidth;
        log.score = threshold + offset;
        log.position = (log.score >= threshold) ? 1 : 2;
        const double top = (log.position == 1) ? 1.0 : 0.0;
        double q = model.baseline_ctr + model.position_effect * top + model.gamma1 * offset +
                   model.gamma2 * offset * top +
                   kw_effects[static_cast<std::size_t>(log.keyword_id)];
        q = std::min(std::max(q, 0.0), 1.0);
        log.click = (u01(splitmix64(s ^ 0x9e6c63d0876a7a31ULL)) < q) ? 1 : 0;
        return log;
    }
};

// Small dense symmetric solve: returns inverse of A (row-major p x p).
std::vector<double> invert(std::vector<double> a, int p) {
    std::vector<double> inv(static_cast<std::size_t>(p * p), 0.0);
    for (int i = 0; i < p; ++i) inv[static_cast<std::size_t>(i * p + i)] = 1.0;
    for (int col = 0; col < p; ++col) {
        int pivot = col;
        for (int r = col + 1; r < p; ++r) {
            if (std::abs(a[static_cast<std::size_t>(r * p + col)]) >
                std::abs(a[static_cast<std::size_t>(pivot * p + col)])) {
                pivot = r;
            }
        }
        const double pv = a[static_cast<std::size_t>(pivot * p + col)];
        if (std::abs(pv) < 1e-12) {
            throw std::runtime_error("rdd_local_linear: rank-deficient design (is every "
                                     "observation on one side of the threshold?)");
        }
        if (pivot != col) {
            for (int c = 0; c < p; ++c) {
                std::swap(a[static_cast<std::size_t>(col * p + c)], a[static_cast<std::size_t>(pivot * p + c)]);
                std::swap(inv[static_cast<std::size_t>(col * p + c)], inv[static_cast<std::size_t>(pivot * p + c)]);
            }
        }
        const double d = a[static_cast<std::size_t>(col * p + col)];
        for (int c = 0; c < p; ++c) {
            a[static_cast<std::size_t>(col * p + c)] /= d;
            inv[static_cast<std::size_t>(col * p + c)] /= d;
        }
        for (int r = 0; r < p; ++r) {
            if (r == col) continue;
            const double f = a[static_cast<std::size_t>(r * p + col)];
            if (f == 0.0) continue;
            for (int c = 0; c < p; ++c) {
                a[static_cast<std::size_t>(r * p + c)] -= f * a[static_cast<std::size_t>(col * p + c)];
                inv[static_cast<std::size_t>(r * p + c)] -= f * inv[static_cast<std::size_t>(col * p + c)];
            }
        }
    }
    return inv;
}

struct KeywordMoments {
    std::int64_t count = 0;
    std::array<double, 4> col_sum{};  // per-column sums within keyword
    double y_sum = 0.0;
};

// Core of the local linear fit. `for_each_row` must be callable repeatedly;
// rows outside the window are skipped here.
template <typename ForEachRow>
RddFit fit_core(ForEachRow&& for_each_row, double threshold, double lambda,
                bool with_keyword_effects, RddDesign design) {
    if (!(lambda > 0.0)) throw std::invalid_argument("rdd fit: lambda must be positive");
    const int p = (design == RddDesign::Full) ? (with_keyword_effects ? 3 : 4)
                                              : (with_keyword_effects ? 1 : 2);

    // Column layout, full design: [1, I, z, zI]; with fixed effects the
    // intercept is absorbed by the within transformation.
    auto columns = [&](const ImpressionLog& log, std::array<double, 4>& x) {
        const double zt = log.score - threshold;
        const double top = (log.position == 1) ? 1.0 : 0.0;
        int c = 0;
        if (!with_keyword_effects) x[static_cast<std::size_t>(c++)] = 1.0;
        x[static_cast<std::size_t>(c++)] = top;
        if (design == RddDesign::Full) {
            x[static_cast<std::size_t>(c++)] = zt;
            x[static_cast<std::size_t>(c++)] = zt * top;
        }
    };

    std::map<int, KeywordMoments> kw;
    std::int64_t n = 0, n_left = 0, n_right = 0;
    if (with_keyword_effects) {
        for_each_row([&](const ImpressionLog& log) {
            if (std::abs(log.score - threshold) > lambda) return;
            std::array<double, 4> x{};
            columns(log, x);
            KeywordMoments& m = kw[log.keyword_id];
            ++m.count;
            for (int c = 0; c < p; ++c) m.col_sum[static_cast<std::size_t>(c)] += x[static_cast<std::size_t>(c)];
            m.y_sum += log.click;
        });
    }

    std::vector<double> xtx(static_cast<std::size_t>(p * p), 0.0);
    std::vector<double> xty(static_cast<std::size_t>(p), 0.0);
    double syy = 0.0;
    double y_grand = 0.0;
    std::array<double, 4> x_grand{};
    for_each_row([&](const ImpressionLog& log) {
        if (std::abs(log.score - threshold) > lambda) return;
        std::array<double, 4> x{};
        columns(log, x);
        double y = log.click;
        ++n;
        if (log.position == 1) ++n_right; else ++n_left;
        y_grand += y;
        for (int c = 0; c < p; ++c) x_grand[static_cast<std::size_t>(c)] += x[static_cast<std::size_t>(c)];
        if (with_keyword_effects) {
            const KeywordMoments& m = kw.at(log.keyword_id);
            const double cnt = static_cast<double>(m.count);
            for (int c = 0; c < p; ++c) {
                x[static_cast<std::size_t>(c)] -= m.col_sum[static_cast<std::size_t>(c)] / cnt;
            }
            y -= m.y_sum / cnt;
        }
        for (int r = 0; r < p; ++r) {
            for (int c = r; c < p; ++c) {
                xtx[static_cast<std::size_t>(r * p + c)] +=
                    x[static_cast<std::size_t>(r)] * x[static_cast<std::size_t>(c)];
            }
            xty[static_cast<std::size_t>(r)] += x[static_cast<std::size_t>(r)] * y;
        }
        syy += y * y;
    });
    for (int r = 0; r < p; ++r) {
        for (int c = 0; c < r; ++c) {
            xtx[static_cast<std::size_t>(r * p + c)] = xtx[static_cast<std::size_t>(c * p + r)];
        }
    }

    if (n_left < 10 || n_right < 10) {
        throw std::runtime_error("rdd fit: need at least 10 observations on each side of the "
                                 "threshold within lambda (have " + std::to_string(n_left) +
                                 " / " + std::to_string(n_right) + ")");
    }

    const std::vector<double> inv = invert(xtx, p);
    std::vector<double> beta(static_cast<std::size_t>(p), 0.0);
    for (int r = 0; r < p; ++r) {
        for (int c = 0; c < p; ++c) {
            beta[static_cast<std::size_t>(r)] +=
                inv[static_cast<std::size_t>(r * p + c)] * xty[static_cast<std::size_t>(c)];
        }
    }

    double rss = syy;
    for (int c = 0; c < p; ++c) rss -= beta[static_cast<std::size_t>(c)] * xty[static_cast<std::size_t>(c)];
    rss = std::max(rss, 0.0);
    const std::int64_t dof =
        n - p - (with_keyword_effects ? static_cast<std::int64_t>(kw.size()) : 0);
    const double sigma2 = (dof > 0) ? rss / static_cast<double>(dof) : 0.0;

    RddFit fit;
    fit.lambda = lambda;
    fit.n_obs = n;
    fit.n_left = n_left;
    fit.n_right = n_right;
    const int xi_col = with_keyword_effects ? 0 : 1;
    fit.xi = beta[static_cast<std::size_t>(xi_col)];
    fit.stderr_xi = std::sqrt(sigma2 * inv[static_cast<std::size_t>(xi_col * p + xi_col)]);
    if (design == RddDesign::Full) {
        fit.gamma1 = beta[static_cast<std::size_t>(xi_col + 1)];
        fit.gamma2 = beta[static_cast<std::size_t>(xi_col + 2)];
    }
    if (with_keyword_effects) {
        // alpha from the grand means; keyword effects as demeaned intercepts.
        const double nn = static_cast<double>(n);
        double xb = 0.0;
        for (int c = 0; c < p; ++c) {
            xb += beta[static_cast<std::size_t>(c)] * x_grand[static_cast<std::size_t>(c)] / nn;
        }
        fit.alpha = y_grand / nn - xb;
        for (const auto& [k, m] : kw) {
            const double cnt = static_cast<double>(m.count);
            double kxb = 0.0;
            for (int c = 0; c < p; ++c) {
                kxb += beta[static_cast<std::size_t>(c)] * m.col_sum[static_cast<std::size_t>(c)] / cnt;
            }
            fit.keyword_effects[k] = (m.y_sum / cnt - kxb) - fit.alpha;
        }
    } else {
        fit.alpha = beta[0];
    }
    return fit;
}

}  // namespace

std::vector<ImpressionLog> generate_logs(const LogModel& model, std::int64_t n_impressions,
                                         double threshold, double noise, std::uint64_t seed) {
    if (n_impressions < 1) throw std::invalid_argument("generate_logs: n_impressions must be >= 1");
    if (model.n_keywords < 1) throw std::invalid_argument("generate_logs: need at least 1 keyword");
    const LogRowGen gen(model, threshold, noise, seed);
    std::vector<ImpressionLog> logs(static_cast<std::size_t>(n_impressions));
    for (std::int64_t i = 0; i < n_impressions; ++i) {
        logs[static_cast<std::size_t>(i)] = gen.row(i);
    }
    return logs;
}

RddFit rdd_local_linear(const std::vector<ImpressionLog>& logs, double threshold, double lambda,
                        bool with_keyword_effects, RddDesign design) {
    auto for_each = [&logs](auto&& cb) {
        for (const ImpressionLog& log : logs) cb(log);
    };
    return fit_core(for_each, threshold, lambda, with_keyword_effects, design);
}

RddFit rdd_fit_streamed(const LogModel& model, std::int64_t n_impressions, double threshold,
                        double noise, std::uint64_t seed, double lambda,
                        bool with_keyword_effects, RddDesign design) {
    const LogRowGen gen(model, threshold, noise, seed);
    auto for_each = [&gen, n_impressions](auto&& cb) {
        for (std::int64_t i = 0; i < n_impressions; ++i) cb(gen.row(i));
    };
    return fit_core(for_each, threshold, lambda, with_keyword_effects, design);
}

Nk15Report nk15_report(const RddFit& fit, double baseline_ctr) {
    if (!(baseline_ctr > 0.0)) throw std::invalid_argument("nk15_report: baseline_ctr must be > 0");
    Nk15Report r;
    r.beta_hat = fit.xi;
    r.power_lower_bound = fit.xi;
    r.relative_effect = fit.xi / baseline_ctr;
    r.stderr = fit.stderr_xi;
    r.n_obs = fit.n_obs;
    return r;
}

void write_logs_csv(std::ostream& out, const std::vector<ImpressionLog>& logs) {
    out << "keyword_id,position,score,click\n";
    char buf[96];
    for (const ImpressionLog& log : logs) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%d\n", log.keyword_id, log.position,
                      log.score, log.click);
        out << buf;
    }
}

std::vector<ImpressionLog> read_logs_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "keyword_id,position,score,click") {
        throw std::runtime_error("read_logs_csv: missing or malformed header");
    }
    std::vector<ImpressionLog> logs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ImpressionLog log;
        char* end = nullptr;
        const char* s = line.c_str();
        log.keyword_id = static_cast<int>(std::strtol(s, &end, 10));
        if (*end != ',') throw std::runtime_error("read_logs_csv: bad row: " + line);
        log.position = static_cast<int>(std::strtol(end + 1, &end, 10));
        if (*end != ',' || (log.position != 1 && log.position != 2)) {
            throw std::runtime_error("read_logs_csv: bad position in row: " + line);
        }
        log.score = std::strtod(end + 1, &end);
        if (*end != ',') throw std::runtime_error("read_logs_csv: bad row: " + line);
        log.click = static_cast<int>(std::strtol(end + 1, &end, 10));
        if (*end != '\0' || (log.click != 0 && log.click != 1)) {
            throw std::runtime_error("read_logs_csv: bad click in row: " + line);
        }
        logs.push_back(log);
    }
    return logs;
}

}  // namespace perfpower
