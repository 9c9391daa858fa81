#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "perfpower/distributions.hpp"
#include "perfpower/numerics.hpp"
#include "perfpower/power.hpp"
#include "perfpower/stats.hpp"
#include "perfpower/strategic.hpp"

namespace perfpower {

// One sampled data instance z = (x, y): features and label/target.
struct Obs {
    double x = 0.0;
    double y = 0.0;
};

struct LossSpec {
    enum class Kind { Squared, ZeroOne };

    Kind kind = Kind::Squared;
    double lipschitz_z = 1.0;     // declared Lipschitz constant of the loss in z
    double strong_convexity = 0.0;  // gamma_sc; 0 disables the parameter-distance check

    double eval(double theta, const Obs& z) const;
};

// Seeded distribution map theta -> D(theta). The theta-independent randomness
// is drawn once per index (draw_base) and the deployment effect applied on
// top, so risk comparisons across theta share common random numbers and the
// decoupled-risk tautology holds bit-exactly.
class DistributionMap {
  public:
    virtual ~DistributionMap() = default;

    virtual Obs draw_base(std::uint64_t seed) const = 0;
    virtual Obs apply(const Obs& base, std::optional<double> theta, std::uint64_t seed) const = 0;

    Obs draw(std::optional<double> theta, std::uint64_t seed) const {
        return apply(draw_base(seed), theta, seed);
    }

    // Data coordinate that enters the power metric (features for strategic
    // maps, the target for location-shift maps).
    virtual double z_of(const Obs& o) const = 0;

    virtual bool has_exact() const { return false; }
    virtual double exact_decoupled_risk(std::optional<double> /*phi*/, double /*theta*/,
                                        const LossSpec& /*loss*/) const;

    const LossSpec& loss() const { return loss_; }
    const std::string& name() const { return name_; }

  protected:
    LossSpec loss_;
    std::string name_ = "map";
};

// z ~ Normal(mu0 + eps * theta, sigma^2); squared loss on the target.
class LocationShiftMap : public DistributionMap {
  public:
    LocationShiftMap(double mu0, double eps, double sigma, LossSpec loss);

    Obs draw_base(std::uint64_t seed) const override;
    Obs apply(const Obs& base, std::optional<double> theta, std::uint64_t seed) const override;
    double z_of(const Obs& o) const override { return o.y; }
    bool has_exact() const override { return loss_.kind == LossSpec::Kind::Squared; }
    double exact_decoupled_risk(std::optional<double> phi, double theta,
                                const LossSpec& loss) const override;

    double mu0() const { return mu0_; }
    double eps() const { return eps_; }
    double sigma() const { return sigma_; }

  private:
    double mu0_, eps_, sigma_;
};

// Threshold deployment over a strategic 1-d base population: features move by
// best response, labels stay. Zero-one loss.
class Strategic1dMap : public DistributionMap {
  public:
    Strategic1dMap(BaseDistribution base, UtilitySpec utility, LossSpec loss,
                   CostModel cost = CostModel::absolute_difference());

    Obs draw_base(std::uint64_t seed) const override;
    Obs apply(const Obs& base, std::optional<double> theta, std::uint64_t seed) const override;
    double z_of(const Obs& o) const override { return o.x; }
    bool has_exact() const override;
    double exact_decoupled_risk(std::optional<double> phi, double theta,
                                const LossSpec& loss) const override;

    const BaseDistribution& base() const { return base_; }
    const UtilitySpec& utility() const { return utility_; }
    const CostModel& cost() const { return cost_; }

  private:
    BaseDistribution base_;
    UtilitySpec utility_;
    CostModel cost_;
};

// MC mean of the map's loss on draws from D(theta).
double performative_risk(double theta, const DistributionMap& map, int n, std::uint64_t seed);

// MC mean of loss(theta; z) with z ~ D(phi). With shared seeds,
// decoupled_risk(theta, theta, ...) == performative_risk(theta, ...) bit-exactly.
double decoupled_risk(std::optional<double> phi, double theta, const DistributionMap& map, int n,
                      std::uint64_t seed);

MeanSe performative_risk_se(double theta, const DistributionMap& map, int n, std::uint64_t seed);
MeanSe decoupled_risk_se(std::optional<double> phi, double theta, const DistributionMap& map,
                         int n, std::uint64_t seed);

struct OptimResult {
    double theta = 0.0;
    bool on_boundary = false;
};

// Grid argmin of the decoupled risk on D(phi) under common random numbers;
// golden-section refinement for squared loss. Ties pick the smallest theta.
OptimResult ex_ante_optimize(std::optional<double> phi, const DistributionMap& map,
                             const Grid& theta_grid, int n, std::uint64_t seed,
                             bool refine = true);

// Grid argmin of the performative risk, common random numbers across theta.
OptimResult ex_post_optimize(const DistributionMap& map, const Grid& theta_grid, int n,
                             std::uint64_t seed, bool refine = true);

// Quadrature / closed-form counterparts for maps with exact risk evaluation.
OptimResult ex_ante_optimize_exact(std::optional<double> phi, const DistributionMap& map,
                                   const Grid& theta_grid);
OptimResult ex_post_optimize_exact(const DistributionMap& map, const Grid& theta_grid);

struct PropSlCase {
    std::string phi_label;
    double theta_sl = 0.0;
    double pr_sl = 0.0;
    double se_sl = 0.0;
    double risk_bound = 0.0;  // pr_po + 4 Lz P
    bool risk_pass = false;
    bool dist_checked = false;
    double param_dist = 0.0;
    double param_bound = 0.0;
    bool dist_pass = true;
    std::string notice;
};

struct PropSlReport {
    double theta_po = 0.0;
    double pr_po = 0.0;
    double se_po = 0.0;
    std::vector<PropSlCase> cases;
    bool all_pass = true;
};

// Verifies the ex-post-gain bound PR(theta_sl) <= PR(theta_po) + 4 Lz P and,
// for strongly convex losses, the parameter-distance bound, across past
// deployments phi in {base, theta_sl, random grid point}.
PropSlReport check_prop_sl(const DistributionMap& map, const Grid& theta_grid,
                           const PowerEstimate& power, const LossSpec& loss, int n,
                           std::uint64_t seed);

// Largest observed per-pair loss change per unit of data movement; an
// empirical probe of the declared Lipschitz constant (meaningful for losses
// that are pointwise Lipschitz, i.e. squared on bounded data).
double empirical_loss_lipschitz(const LossSpec& loss, double theta,
                                const std::vector<Obs>& draws, bool data_coord_is_x);

}  // namespace perfpower
