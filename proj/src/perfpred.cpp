#include "perfpower/perfpred.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "perfpower/rng.hpp"
#include "perfpower/stats.hpp"

namespace perfpower {

double LossSpec::eval(double theta, const Obs& z) const {
    switch (kind) {
        case Kind::Squared: {
            const double d = theta - z.y;
            return d * d;
        }
        case Kind::ZeroOne: {
            const int pred = (z.x >= theta) ? 1 : 0;
            return std::abs(static_cast<double>(pred) - z.y);
        }
    }
    return 0.0;
}

double DistributionMap::exact_decoupled_risk(std::optional<double>, double,
                                             const LossSpec&) const {
    throw std::logic_error("exact risk path not available for map '" + name_ + "'");
}

LocationShiftMap::LocationShiftMap(double mu0, double eps, double sigma, LossSpec loss)
    : mu0_(mu0), eps_(eps), sigma_(sigma) {
    loss_ = loss;
    name_ = "location-shift";
}

Obs LocationShiftMap::draw_base(std::uint64_t seed) const {
    auto eng = make_engine(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    return Obs{0.0, mu0_ + sigma_ * g(eng)};
}

Obs LocationShiftMap::apply(const Obs& base, std::optional<double> theta,
                            std::uint64_t) const {
    if (!theta) return base;
    return Obs{base.x, base.y + eps_ * (*theta)};
}

double LocationShiftMap::exact_decoupled_risk(std::optional<double> phi, double theta,
                                              const LossSpec& loss) const {
    if (loss.kind != LossSpec::Kind::Squared) {
        throw std::logic_error("location-shift exact risk requires squared loss");
    }
    const double shift = phi ? eps_ * (*phi) : 0.0;
    const double d = theta - mu0_ - shift;
    return d * d + sigma_ * sigma_;
}

Strategic1dMap::Strategic1dMap(BaseDistribution base, UtilitySpec utility, LossSpec loss,
                               CostModel cost)
    : base_(std::move(base)), utility_(utility), cost_(std::move(cost)) {
    loss_ = loss;
    name_ = "strategic-1d";
}

Obs Strategic1dMap::draw_base(std::uint64_t seed) const {
    auto eng = make_engine(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double x = base_.sample(eng);
    const double y = (u01(eng) < base_.posterior(x)) ? 1.0 : 0.0;
    return Obs{x, y};
}

Obs Strategic1dMap::apply(const Obs& base, std::optional<double> theta, std::uint64_t) const {
    if (!theta) return base;
    return Obs{best_response_1d(base.x, *theta, utility_.delta_gamma(), cost_), base.y};
}

bool Strategic1dMap::has_exact() const {
    return loss_.kind == LossSpec::Kind::ZeroOne &&
           cost_.kind() == CostModel::Kind::AbsoluteDifference;
}

double Strategic1dMap::exact_decoupled_risk(std::optional<double> phi, double theta,
                                            const LossSpec& loss) const {
    if (loss.kind != LossSpec::Kind::ZeroOne) {
        throw std::logic_error("strategic-1d exact risk requires zero-one loss");
    }
    // Under a past deployment phi, features sit at BR(x, phi); the classifier
    // theta accepts a unit iff BR(x, phi) >= theta. Integrate the conditional
    // error over the base density, splitting at every acceptance breakpoint.
    auto [lo, hi] = base_.quad_support();
    const double dg = utility_.delta_gamma();
    std::vector<double> cuts = {lo, hi, theta};
    if (phi) {
        cuts.push_back(*phi - dg);
        cuts.push_back(*phi);
    }
    std::sort(cuts.begin(), cuts.end());
    auto accepted = [&](double x) {
        const double pos = phi ? best_response_1d(x, *phi, dg, cost_) : x;
        return pos >= theta;
    };
    double risk = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = std::max(cuts[i], lo);
        const double b = std::min(cuts[i + 1], hi);
        if (b <= a) continue;
        const bool acc = accepted(0.5 * (a + b));
        auto integrand = [&](double x) {
            const double p = base_.posterior(x);
            return base_.pdf(x) * (acc ? (1.0 - p) : p);
        };
        risk += adaptive_simpson(integrand, a, b, 1e-12);
    }
    return risk;
}

namespace {

MeanSe risk_mc(std::optional<double> dist_theta, double loss_theta, const DistributionMap& map,
               int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("risk estimate: n must be >= 1");
    std::vector<double> losses(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
        losses[static_cast<std::size_t>(i)] = map.loss().eval(loss_theta, map.draw(dist_theta, s));
    }
    return mean_se(losses);
}

}  // namespace

double performative_risk(double theta, const DistributionMap& map, int n, std::uint64_t seed) {
    return risk_mc(theta, theta, map, n, seed).mean;
}

double decoupled_risk(std::optional<double> phi, double theta, const DistributionMap& map, int n,
                      std::uint64_t seed) {
    return risk_mc(phi, theta, map, n, seed).mean;
}

MeanSe performative_risk_se(double theta, const DistributionMap& map, int n,
                            std::uint64_t seed) {
    return risk_mc(theta, theta, map, n, seed);
}

MeanSe decoupled_risk_se(std::optional<double> phi, double theta, const DistributionMap& map,
                         int n, std::uint64_t seed) {
    return risk_mc(phi, theta, map, n, seed);
}

namespace {

struct GridArgmin {
    std::size_t index = 0;
    double value = 0.0;
};

// Grid argmin with ties resolved to the smallest theta (first index).
template <typename RiskAt>
GridArgmin argmin_on_grid(const Grid& grid, RiskAt&& risk_at) {
    GridArgmin best;
    best.value = risk_at(grid.at(0));
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double v = risk_at(grid.at(i));
        if (v < best.value) {
            best.value = v;
            best.index = i;
        }
    }
    return best;
}

std::vector<Obs> predraw(const DistributionMap& map, int n, std::uint64_t seed) {
    std::vector<Obs> base(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        base[static_cast<std::size_t>(i)] = map.draw_base(derive_seed(seed, static_cast<std::uint64_t>(i)));
    }
    return base;
}

}  // namespace

OptimResult ex_ante_optimize(std::optional<double> phi, const DistributionMap& map,
                             const Grid& theta_grid, int n, std::uint64_t seed, bool refine) {
    if (theta_grid.size() == 0) throw std::invalid_argument("ex_ante_optimize: empty grid");
    const std::vector<Obs> base = predraw(map, n, seed);
    std::vector<Obs> data(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        data[i] = map.apply(base[i], phi, derive_seed(seed, static_cast<std::uint64_t>(i)));
    }
    std::vector<double> buf(data.size());
    auto risk_at = [&](double theta) {
        for (std::size_t i = 0; i < data.size(); ++i) buf[i] = map.loss().eval(theta, data[i]);
        return mean(buf);
    };
    const GridArgmin best = argmin_on_grid(theta_grid, risk_at);
    OptimResult out;
    out.theta = theta_grid.at(best.index);
    out.on_boundary = (best.index == 0 || best.index + 1 == theta_grid.size());
    if (refine && map.loss().kind == LossSpec::Kind::Squared && !out.on_boundary) {
        out.theta = golden_min(risk_at, out.theta - theta_grid.step, out.theta + theta_grid.step);
    }
    return out;
}

OptimResult ex_post_optimize(const DistributionMap& map, const Grid& theta_grid, int n,
                             std::uint64_t seed, bool refine) {
    if (theta_grid.size() == 0) throw std::invalid_argument("ex_post_optimize: empty grid");
    const std::vector<Obs> base = predraw(map, n, seed);
    std::vector<double> buf(base.size());
    auto risk_at = [&](double theta) {
        for (std::size_t i = 0; i < base.size(); ++i) {
            const Obs z = map.apply(base[i], theta, derive_seed(seed, static_cast<std::uint64_t>(i)));
            buf[i] = map.loss().eval(theta, z);
        }
        return mean(buf);
    };
    const GridArgmin best = argmin_on_grid(theta_grid, risk_at);
    OptimResult out;
    out.theta = theta_grid.at(best.index);
    out.on_boundary = (best.index == 0 || best.index + 1 == theta_grid.size());
    if (refine && map.loss().kind == LossSpec::Kind::Squared && !out.on_boundary) {
        out.theta = golden_min(risk_at, out.theta - theta_grid.step, out.theta + theta_grid.step);
    }
    return out;
}

OptimResult ex_ante_optimize_exact(std::optional<double> phi, const DistributionMap& map,
                                   const Grid& theta_grid) {
    const GridArgmin best = argmin_on_grid(theta_grid, [&](double theta) {
        return map.exact_decoupled_risk(phi, theta, map.loss());
    });
    return {theta_grid.at(best.index),
            best.index == 0 || best.index + 1 == theta_grid.size()};
}

OptimResult ex_post_optimize_exact(const DistributionMap& map, const Grid& theta_grid) {
    const GridArgmin best = argmin_on_grid(theta_grid, [&](double theta) {
        return map.exact_decoupled_risk(theta, theta, map.loss());
    });
    return {theta_grid.at(best.index),
            best.index == 0 || best.index + 1 == theta_grid.size()};
}

PropSlReport check_prop_sl(const DistributionMap& map, const Grid& theta_grid,
                           const PowerEstimate& power, const LossSpec& loss, int n,
                           std::uint64_t seed) {
    PropSlReport report;
    const OptimResult po = ex_post_optimize(map, theta_grid, n, seed);
    report.theta_po = po.theta;
    const MeanSe pr_po = performative_risk_se(po.theta, map, n, derive_seed(seed, fnv1a("po")));
    report.pr_po = pr_po.mean;
    report.se_po = pr_po.se;

    const OptimResult sl_base = ex_ante_optimize(std::nullopt, map, theta_grid, n, seed);
    auto eng = make_engine(derive_seed(seed, fnv1a("phi-random")));
    std::uniform_int_distribution<std::size_t> pick(0, theta_grid.size() - 1);
    const double phi_random = theta_grid.at(pick(eng));

    struct PhiChoice {
        std::string label;
        std::optional<double> phi;
    };
    const std::vector<PhiChoice> phis = {
        {"base", std::nullopt},
        {"theta_sl", sl_base.theta},
        {"random:" + threshold_label(phi_random), phi_random},
    };

    for (const auto& [label, phi] : phis) {
        PropSlCase c;
        c.phi_label = label;
        const OptimResult sl = ex_ante_optimize(phi, map, theta_grid, n, seed);
        c.theta_sl = sl.theta;
        const MeanSe pr_sl = performative_risk_se(sl.theta, map, n, derive_seed(seed, fnv1a("sl")));
        c.pr_sl = pr_sl.mean;
        c.se_sl = pr_sl.se;
        const double mc_slack = 3.0 * std::sqrt(pr_sl.se * pr_sl.se + pr_po.se * pr_po.se);
        c.risk_bound = pr_po.mean + 4.0 * loss.lipschitz_z * power.value;
        c.risk_pass = c.pr_sl <= c.risk_bound + mc_slack;
        if (loss.strong_convexity > 0.0) {
            c.dist_checked = true;
            c.param_dist = std::abs(c.theta_sl - report.theta_po);
            c.param_bound =
                std::sqrt(8.0 * loss.lipschitz_z * power.value / loss.strong_convexity);
            c.dist_pass = c.param_dist <= c.param_bound + theta_grid.step;
        } else {
            c.notice = "distance check skipped: loss not strongly convex";
        }
        report.all_pass = report.all_pass && c.risk_pass && c.dist_pass;
        report.cases.push_back(std::move(c));
    }
    return report;
}

double empirical_loss_lipschitz(const LossSpec& loss, double theta,
                                const std::vector<Obs>& draws, bool data_coord_is_x) {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < draws.size(); i += 2) {
        const Obs& a = draws[i];
        const Obs& b = draws[i + 1];
        const double dz = data_coord_is_x ? std::abs(a.x - b.x) : std::abs(a.y - b.y);
        if (dz == 0.0) continue;
        best = std::max(best, std::abs(loss.eval(theta, a) - loss.eval(theta, b)) / dz);
    }
    return best;
}

}  // namespace perfpower
