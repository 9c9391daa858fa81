#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perfpower/datapoint.hpp"
#include "perfpower/distributions.hpp"
#include "perfpower/numerics.hpp"
#include "perfpower/power.hpp"

namespace perfpower {

struct ParticipantRecord {
    int id = 0;
    std::vector<double> x_orig;
    std::vector<double> x_current;  // defaults to x_orig before any deployment
    int y = 0;                      // label is immutable under strategic adaptation
};

// Feature-change cost. The metric kinds respect nonnegativity, symmetry,
// identity and the triangle inequality; coordinates listed as immutable carry
// infinite cost when they differ. Quadratic1d is not a metric; it exists for
// the two-firm competition cost family and is rejected by best-response code.
class CostModel {
  public:
    enum class Kind { AbsoluteDifference, WeightedL1, Quadratic1d };

    static CostModel absolute_difference(std::vector<int> immutable_coords = {});
    static CostModel weighted_l1(std::vector<double> weights,
                                 std::vector<int> immutable_coords = {});
    static CostModel quadratic_1d();

    double operator()(std::span<const double> a, std::span<const double> b) const;
    double scalar(double a, double b) const;

    bool is_metric() const { return kind_ != Kind::Quadratic1d; }
    Kind kind() const { return kind_; }
    double weight(std::size_t coord) const;
    const std::vector<int>& immutable_coords() const { return immutable_; }
    bool coord_immutable(std::size_t coord) const;

  private:
    Kind kind_ = Kind::AbsoluteDifference;
    std::vector<double> weights_;
    std::vector<int> immutable_;
};

struct UtilitySpec {
    double gamma = 1.0;  // service utility, > 0
    double beta = 0.0;   // outside option, >= 0

    double delta_gamma() const { return std::max(0.0, gamma - beta); }
};

// Binary predictor together with the candidate points used for the
// cheapest-accepted-point search. For a 1-d threshold the single candidate
// {theta} is exact; multi-dimensional rules supply a projection grid.
struct Predictor {
    std::string label;
    std::function<bool(const std::vector<double>&)> accepts;
    std::vector<std::vector<double>> acceptance_candidates;
};

Predictor threshold_predictor(double theta);

// Rational feature response: argmax over x' of delta_gamma * f(x') - c(x_orig, x').
// Moves exactly when the cheapest accepted point costs no more than the
// surplus budget (ties at the exact budget move).
std::vector<double> best_response(const ParticipantRecord& p, const Predictor& f,
                                  const UtilitySpec& u, const CostModel& c);

double best_response_1d(double x_orig, double theta, double delta_gamma, const CostModel& c);

// sup over the budget ball {x' : c(x_orig, x') <= delta_gamma} of
// dist(x_current, x'). Attained at a ball vertex for the shipped metric costs.
double reachable_sup(const ParticipantRecord& p, const UtilitySpec& u, const CostModel& c,
                     const Metric& dist);

// Farthest reachable point itself (ties broken to the coordinate-wise
// smallest vertex); used to construct the personalized predictor.
std::vector<double> reachable_argmax(const ParticipantRecord& p, const UtilitySpec& u,
                                     const CostModel& c, const Metric& dist);

// Population average of reachable_sup: the aggregate upper bound on power.
double monopoly_upper_bound(const std::vector<ParticipantRecord>& pop, const UtilitySpec& u,
                            const CostModel& c, const Metric& dist);
double monopoly_upper_bound(const std::vector<ParticipantRecord>& pop,
                            const std::vector<UtilitySpec>& per_unit, const CostModel& c,
                            const Metric& dist);

// Exact power under full personalization: constructs the predictor accepting
// each unit's farthest reachable point and evaluates the induced movement.
// Requires coordinate 0 immutable and equal to the unit id.
PowerEstimate personalized_power(const std::vector<ParticipantRecord>& pop, const UtilitySpec& u,
                                 const CostModel& c, const Metric& dist);
PowerEstimate personalized_power(const std::vector<ParticipantRecord>& pop,
                                 const std::vector<UtilitySpec>& per_unit, const CostModel& c,
                                 const Metric& dist);

inline double corollary_bound(double lipschitz, double delta_gamma) {
    return 2.0 * lipschitz * delta_gamma;
}

// Threshold where the posterior crosses 1/2 (the supervised-learning
// threshold of the 1-d example). Bisection to 1e-9.
double solve_theta_sl(const BaseDistribution& base);

// 1-d power sandwich under dist = c = |.|:
//   0.5 * dg * Pr[x in [theta_sl, theta_sl + 0.5 dg]]  <=  P  <=  2 dg.
std::pair<double, double> one_d_bounds(const BaseDistribution& base, double theta_sl,
                                       double delta_gamma);

// Both published variants of the sandwich; `lower` / `upper` are the
// internally consistent pair used by the checks.
struct OneDBoundsReport {
    double lower = 0.0;          // 0.5 * dg * Pr[...]
    double upper = 0.0;          // 2 * dg
    double lower_gamma_variant = 0.0;  // 0.5 * gamma * Pr[...]
    double upper_tight_variant = 0.0;  // dg
    double interval_mass = 0.0;
};
OneDBoundsReport one_d_bounds_report(const BaseDistribution& base, double theta_sl,
                                     const UtilitySpec& u);

// 1-d monopoly scenario: base population, threshold action grids and the
// counterfactual simulator used by the power estimator.
struct Strategic1dScenario {
    BaseDistribution base;
    UtilitySpec utility;
    CostModel cost = CostModel::absolute_difference();
    int n_units = 100000;
    std::uint64_t master_seed = 1;
};

std::vector<ParticipantRecord> sample_population(const Strategic1dScenario& sc);

// Sets x_current to the best response against a deployed threshold
// (the economy's status quo before a counterfactual action).
void deploy_threshold(std::vector<ParticipantRecord>& pop, double theta, const UtilitySpec& u,
                      const CostModel& c);

struct ThresholdActions {
    std::vector<double> thetas;
    ActionSet set;
};

ThresholdActions threshold_actions(const Grid& grid, bool exhaustive = false);
std::string threshold_label(double theta);

Population to_power_population(const std::vector<ParticipantRecord>& pop);

CounterfactualSimulator make_threshold_simulator(const std::vector<ParticipantRecord>& pop,
                                                 const ThresholdActions& actions,
                                                 const UtilitySpec& u, const CostModel& c);

}  // namespace perfpower
