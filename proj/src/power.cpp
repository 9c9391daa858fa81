#include "perfpower/power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "perfpower/rng.hpp"
#include "perfpower/stats.hpp"

namespace perfpower {

PowerEstimate estimate_power(const CounterfactualSimulator& sim, const ActionSet& actions,
                             const Population& pop, const Metric& metric, int n_rep,
                             std::uint64_t seed) {
    if (actions.size() == 0) throw std::invalid_argument("estimate_power: empty action set");
    if (pop.empty()) throw std::invalid_argument("estimate_power: empty population");
    if (n_rep < 1) throw std::invalid_argument("estimate_power: n_rep must be >= 1");

    PowerEstimate best;
    best.value = -1.0;
    best.n_replicates = n_rep;
    std::vector<double> unit_dists(pop.size());
    std::vector<double> rep_means(static_cast<std::size_t>(n_rep));

    for (std::size_t ai = 0; ai < actions.size(); ++ai) {
        const std::uint64_t action_key = fnv1a(actions.labels[ai]);
        for (int r = 0; r < n_rep; ++r) {
            for (std::size_t ui = 0; ui < pop.size(); ++ui) {
                const Unit& u = pop[ui];
                const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(u.id),
                                                    action_key, static_cast<std::uint64_t>(r));
                const DataPoint z = sim.respond(ai, u, s);
                const double d = metric(u.z_current, z);
                if (!std::isfinite(d)) {
                    throw std::runtime_error("estimate_power: non-finite distance for unit " +
                                             std::to_string(u.id) + " under action '" +
                                             actions.labels[ai] + "'");
                }
                unit_dists[ui] = d;
            }
            rep_means[static_cast<std::size_t>(r)] = mean(unit_dists);
        }
        const MeanSe ms = mean_se(rep_means);
        if (ms.mean > best.value) {
            best.value = ms.mean;
            best.ci_halfwidth = ms.se;
            best.argmax_action = actions.labels[ai];
        }
    }
    best.kind = actions.exhaustive ? PowerEstimate::Kind::ExactMc
                                   : PowerEstimate::Kind::LowerBound;
    return best;
}

double wasserstein1(std::vector<double> samples_a, std::vector<double> samples_b) {
    if (samples_a.empty() || samples_a.size() != samples_b.size()) {
        throw std::invalid_argument("wasserstein1: samples must be nonempty and of equal size");
    }
    std::sort(samples_a.begin(), samples_a.end());
    std::sort(samples_b.begin(), samples_b.end());
    std::vector<double> diffs(samples_a.size());
    for (std::size_t i = 0; i < samples_a.size(); ++i) {
        diffs[i] = std::abs(samples_a[i] - samples_b[i]);
    }
    return mean(diffs);
}

namespace {

std::vector<double> sample_marginal(const CounterfactualSimulator& sim, std::size_t action_index,
                                    std::uint64_t action_key, const Population& pop, int n_rep,
                                    std::uint64_t seed) {
    std::vector<double> out;
    out.reserve(pop.size() * static_cast<std::size_t>(n_rep));
    for (int r = 0; r < n_rep; ++r) {
        for (const Unit& u : pop) {
            const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(u.id),
                                                action_key, static_cast<std::uint64_t>(r));
            out.push_back(sim.respond(action_index, u, s).as_scalar());
        }
    }
    return out;
}

}  // namespace

WassersteinBoundReport check_wasserstein_bound(const CounterfactualSimulator& sim,
                                               const ActionSet& actions, const Population& pop,
                                               const Metric& metric, int n_rep,
                                               std::uint64_t seed, int max_pairs) {
    WassersteinBoundReport report;
    report.power = estimate_power(sim, actions, pop, metric, n_rep, seed);

    const std::size_t n = actions.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) pairs.emplace_back(i, j);
        }
    }
    if (pairs.size() > static_cast<std::size_t>(max_pairs)) {
        auto eng = make_engine(derive_seed(seed, fnv1a("w1-pair-subsample")));
        std::shuffle(pairs.begin(), pairs.end(), eng);
        pairs.resize(static_cast<std::size_t>(max_pairs));
    }

    const double bound = 2.0 * report.power.value;
    const double slack = 3.0 * report.power.ci_halfwidth;
    for (const auto& [i, j] : pairs) {
        const auto sa = sample_marginal(sim, i, fnv1a(actions.labels[i]), pop, n_rep, seed);
        const auto sb = sample_marginal(sim, j, fnv1a(actions.labels[j]), pop, n_rep, seed);
        const double w1 = wasserstein1(sa, sb);
        const double ratio = (w1 == 0.0) ? 0.0 : w1 / std::max(bound, 1e-300);
        if (w1 > bound + slack) report.all_within_bound = false;
        if (ratio > report.max_ratio || report.n_pairs == 0) {
            if (ratio >= report.max_ratio) {
                report.max_ratio = ratio;
                report.worst_pair = actions.labels[i] + " vs " + actions.labels[j];
            }
        }
        report.max_w1 = std::max(report.max_w1, w1);
        ++report.n_pairs;
    }
    if (pairs.empty()) report.max_ratio = 0.0;
    return report;
}

double lipschitz_ratio(const Metric& dist, const Metric& cost,
                       const std::vector<std::pair<DataPoint, DataPoint>>& probe_pairs) {
    double best = 0.0;
    for (const auto& [a, b] : probe_pairs) {
        const double c = cost(a, b);
        const double d = dist(a, b);
        if (c == 0.0) {
            if (d > 0.0) return std::numeric_limits<double>::infinity();
            continue;  // 0/0 probe carries no information
        }
        best = std::max(best, d / c);
    }
    return best;
}

}  // namespace perfpower
