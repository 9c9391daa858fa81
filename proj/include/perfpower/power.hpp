#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "perfpower/datapoint.hpp"

namespace perfpower {

// Finite, enumerable family of deployable actions. Labels are the stable
// identity of an action: seed streams derive from the label hash, so the same
// action gets the same draws no matter which set it appears in.
struct ActionSet {
    std::vector<std::string> labels;
    bool exhaustive = false;  // true when the set covers the intended action family

    std::size_t size() const { return labels.size(); }
};

// Potential-outcome sampler: respond(action, unit, seed) is the counterfactual
// data point of `unit` if the firm took `action`. Deterministic per
// (action, unit, seed); responding with the null action must reproduce
// the unit's reference data point.
class CounterfactualSimulator {
  public:
    using RespondFn =
        std::function<DataPoint(std::size_t action_index, const Unit&, std::uint64_t seed)>;

    CounterfactualSimulator(Population reference, RespondFn respond)
        : reference_(std::move(reference)), respond_(std::move(respond)) {}

    const Population& reference_state() const { return reference_; }

    DataPoint respond(std::size_t action_index, const Unit& u, std::uint64_t seed) const {
        return respond_(action_index, u, seed);
    }

  private:
    Population reference_;
    RespondFn respond_;
};

struct PowerEstimate {
    enum class Kind { ExactMc, LowerBound, UpperBound };

    double value = 0.0;
    Kind kind = Kind::ExactMc;
    double ci_halfwidth = 0.0;  // one standard error; checks apply 3-sigma slack
    std::string argmax_action;
    int n_replicates = 0;
};

// Monte-Carlo estimate of performative power over an enumerated action set:
// max over actions of the population mean of E[dist(z(u), respond(f,u,.))],
// with the expectation taken over n_rep derived-seed replicates.
PowerEstimate estimate_power(const CounterfactualSimulator& sim, const ActionSet& actions,
                             const Population& pop, const Metric& metric, int n_rep,
                             std::uint64_t seed);

// Exact 1-d Wasserstein-1 between empirical measures of equal size:
// mean absolute difference of order statistics.
double wasserstein1(std::vector<double> samples_a, std::vector<double> samples_b);

struct WassersteinBoundReport {
    PowerEstimate power;
    int n_pairs = 0;
    double max_ratio = 0.0;  // max over pairs of W1 / (2 P_hat); 0/0 counts as 0
    double max_w1 = 0.0;
    std::string worst_pair;
    bool all_within_bound = true;  // W1 <= 2 P_hat + 3 ci for every pair
};

// Checks W1(D(theta), D(theta')) <= 2 P_hat for ordered action pairs drawn
// from the set (all pairs when small, otherwise a seeded subsample).
// Scalar-kind data points only.
WassersteinBoundReport check_wasserstein_bound(const CounterfactualSimulator& sim,
                                               const ActionSet& actions, const Population& pop,
                                               const Metric& metric, int n_rep,
                                               std::uint64_t seed, int max_pairs = 100);

// Largest observed dist/cost ratio over probe pairs; a lower estimate of the
// true Lipschitz constant relating the two metrics. Zero-cost probes with
// nonzero distance return infinity.
double lipschitz_ratio(const Metric& dist, const Metric& cost,
                       const std::vector<std::pair<DataPoint, DataPoint>>& probe_pairs);

}  // namespace perfpower
