#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "perfpower/datapoint.hpp"
#include "perfpower/power.hpp"

namespace perfpower {

using ScoreMatrix = std::vector<std::vector<double>>;  // [viewer][item]

// Top-2 content recommender over C items; item 0 is the empty slot. Slot
// multipliers scale a viewer's base affinity into per-impression click
// probabilities, m1 >= m2 and m1 + m2 <= 1 keep them a sub-distribution.
struct RecommenderWorld {
    int item_count = 2;                          // C, including the empty item 0
    std::vector<std::vector<double>> base_click;  // [viewer][item], column 0 all zero
    double m1 = 0.1;
    double m2 = 0.05;
    ScoreMatrix s_curr;

    int n_viewers() const { return static_cast<int>(base_click.size()); }
    void validate() const;
};

RecommenderWorld make_uniform_world(int n_viewers, int item_count, double affinity, double m1,
                                    double m2, std::uint64_t seed);
RecommenderWorld make_random_world(int n_viewers, int item_count, std::uint64_t seed);

// Ordered top-2 item indices under a score vector; ties resolve by index order.
std::pair<int, int> top_two(const std::vector<double>& scores);

// Exact consumption histogram of one viewer under a score function:
// click item in slot 1 / slot 2 / consume nothing.
DataPoint consumption_histogram(const RecommenderWorld& world, int viewer,
                                const ScoreMatrix& score_fn);

// Realized max gap between the top two scores over all viewers: the radius
// delta of the local perturbation set S.
double score_delta(const RecommenderWorld& world);

// Score function that swaps the two top items of every viewer simultaneously;
// membership in S is asserted.
ScoreMatrix build_swap_action(const RecommenderWorld& world);

struct PositionEffect {
    double beta = 0.0;             // |population mean of per-viewer effects| (Def-style)
    double mean_abs_effect = 0.0;  // population mean of per-viewer |effects|
    double se = 0.0;               // MC standard error of the signed mean (0 on exact path)
};

// Average causal effect of flipping the two display slots on consumption of
// the initially-top item.
PositionEffect causal_effect_position_exact(const RecommenderWorld& world);
PositionEffect causal_effect_position_mc(const RecommenderWorld& world, int n_rep,
                                         std::uint64_t seed);

struct DddPowerReport {
    PowerEstimate power;         // over the S-grid plus the swap action
    double beta_exact = 0.0;
    double beta_mc = 0.0;
    double beta_mc_se = 0.0;
    double l1_swap_effect = 0.0;  // population mean l1 shift under the swap
    double coord_effect = 0.0;    // mean |top-item coordinate shift|
    bool chain_ok = false;        // power >= l1 >= coord >= beta, exact path
    bool pass = false;            // power >= beta_mc - 3 se
};

// Lower-bounds performative power by the causal effect of position and
// reports every link of the chain.
DddPowerReport power_lower_bound_ddd(const RecommenderWorld& world, int n_rep,
                                     std::uint64_t seed, int n_perturb_actions = 4);

struct ImpressionLog {
    int keyword_id = 0;
    int position = 1;  // 1 or 2, assigned by threshold on the running score
    double score = 0.0;
    int click = 0;
};

// Synthetic stand-in for observational impression data with a known
// position-effect discontinuity at the threshold.
struct LogModel {
    int n_keywords = 40;
    double baseline_ctr = 0.0233;   // click level at the threshold in slot 2
    double position_effect = 0.0;   // jump at the threshold (slot 1 vs slot 2)
    double gamma1 = 0.0;            // smooth score dependence
    double gamma2 = 0.0;            // extra slope in slot 1
    double score_halfwidth = 0.5;   // running scores ~ threshold + U(-w, w)
};

std::vector<ImpressionLog> generate_logs(const LogModel& model, std::int64_t n_impressions,
                                         double threshold, double noise, std::uint64_t seed);

struct RddFit {
    double alpha = 0.0;
    double xi = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double stderr_xi = 0.0;
    double lambda = 0.0;
    std::int64_t n_obs = 0;
    std::int64_t n_left = 0;
    std::int64_t n_right = 0;
    std::map<int, double> keyword_effects;  // demeaned fixed effects, when fitted
};

enum class RddDesign { Full, BinaryOnly };

// Local linear regression y = alpha + xi I[p=1] + g1 z + g2 z I[p=1] (+ g(k))
// on the window |z - threshold| <= lambda. BinaryOnly drops the score terms,
// reducing xi to the in-window difference in mean clicks.
RddFit rdd_local_linear(const std::vector<ImpressionLog>& logs, double threshold, double lambda,
                        bool with_keyword_effects, RddDesign design = RddDesign::Full);

// Same fit without materializing the logs: rows are regenerated from seeds,
// which keeps very large samples in O(1) memory.
RddFit rdd_fit_streamed(const LogModel& model, std::int64_t n_impressions, double threshold,
                        double noise, std::uint64_t seed, double lambda,
                        bool with_keyword_effects, RddDesign design = RddDesign::Full);

struct Nk15Report {
    double beta_hat = 0.0;
    double power_lower_bound = 0.0;
    double relative_effect = 0.0;
    double stderr = 0.0;
    std::int64_t n_obs = 0;
};

Nk15Report nk15_report(const RddFit& fit, double baseline_ctr);

// Log CSV: header keyword_id,position,score,click; scores carry 17
// significant digits so a round trip is bit-exact.
void write_logs_csv(std::ostream& out, const std::vector<ImpressionLog>& logs);
std::vector<ImpressionLog> read_logs_csv(std::istream& in);

}  // namespace perfpower
