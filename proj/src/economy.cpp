#include "perfpower/economy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <stdexcept>

#include "perfpower/rng.hpp"
#include "perfpower/stats.hpp"
#include "perfpower/strategic.hpp"

namespace perfpower {

void MultiFirmMap::validate() const {
    if (firm_count < 1) throw std::invalid_argument("MultiFirmMap: firm_count must be >= 1");
    if (monopoly == nullptr) throw std::invalid_argument("MultiFirmMap: monopoly map missing");
}

namespace {

int firm_assignment(int firm_count, std::uint64_t seed) {
    const std::uint64_t h = splitmix64(derive_seed(seed, fnv1a("firm-assignment")));
    return static_cast<int>(h % static_cast<std::uint64_t>(firm_count));
}

// Exact decoupled risks over the grid, cached by past-deployment value.
class RiskTable {
  public:
    RiskTable(const DistributionMap& map, const Grid& grid) : map_(map), grid_(grid) {}

    const std::vector<double>& row(std::optional<double> phi) {
        const double key = phi ? *phi : std::numeric_limits<double>::quiet_NaN();
        std::uint64_t bits;
        std::memcpy(&bits, &key, sizeof(bits));
        auto it = rows_.find(bits);
        if (it != rows_.end()) return it->second;
        std::vector<double> r(grid_.size());
        for (std::size_t k = 0; k < grid_.size(); ++k) {
            r[k] = map_.exact_decoupled_risk(phi, grid_.at(k), map_.loss());
        }
        return rows_.emplace(bits, std::move(r)).first->second;
    }

    const std::vector<double>& pr_row() {
        if (pr_.empty()) {
            pr_.resize(grid_.size());
            for (std::size_t k = 0; k < grid_.size(); ++k) {
                pr_[k] = map_.exact_decoupled_risk(grid_.at(k), grid_.at(k), map_.loss());
            }
        }
        return pr_;
    }

  private:
    const DistributionMap& map_;
    const Grid& grid_;
    std::map<std::uint64_t, std::vector<double>> rows_;
    std::vector<double> pr_;
};

std::size_t argmin_smallest(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] < v[best]) best = i;
    }
    return best;
}

}  // namespace

Obs mixture_draw(const MultiFirmMap& map, std::span<const double> profile, int acting_firm,
                 std::optional<double> acting_theta, std::uint64_t seed) {
    map.validate();
    const int j = firm_assignment(map.firm_count, seed);
    const Obs base = map.monopoly->draw_base(seed);
    std::optional<double> theta;
    if (j == acting_firm) {
        theta = acting_theta;
    } else if (static_cast<std::size_t>(j) < profile.size()) {
        theta = profile[static_cast<std::size_t>(j)];
    }
    return map.monopoly->apply(base, theta, seed);
}

namespace {

// Firm objective over the grid, exact path: the firm's own deviation moves
// only its 1/C slice of the mixture.
std::vector<double> firm_objective_exact(RiskTable& table, const std::vector<double>& profile,
                                         int firm, int C, const Grid& grid) {
    std::vector<double> obj(grid.size(), 0.0);
    const std::vector<double>& pr = table.pr_row();
    for (std::size_t k = 0; k < grid.size(); ++k) obj[k] = pr[k];
    for (int j = 0; j < C; ++j) {
        if (j == firm) continue;
        const std::vector<double>& row = table.row(profile[static_cast<std::size_t>(j)]);
        for (std::size_t k = 0; k < grid.size(); ++k) obj[k] += row[k];
    }
    const double inv_c = 1.0 / static_cast<double>(C);
    for (double& v : obj) v *= inv_c;
    return obj;
}

std::vector<double> firm_objective_mc(const MultiFirmMap& map, const std::vector<double>& profile,
                                      int firm, const Grid& grid, const LossSpec& loss, int n_mc,
                                      std::uint64_t seed) {
    std::vector<double> obj(grid.size(), 0.0);
    std::vector<double> buf(static_cast<std::size_t>(n_mc));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double theta = grid.at(k);
        for (int i = 0; i < n_mc; ++i) {
            const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
            buf[static_cast<std::size_t>(i)] = loss.eval(theta, mixture_draw(map, profile, firm, theta, s));
        }
        obj[k] = mean(buf);
    }
    return obj;
}

}  // namespace

EquilibriumProfile best_response_dynamics(const MultiFirmMap& map,
                                          const std::vector<LossSpec>& losses, const Grid& grid,
                                          int max_iter, double tol, std::uint64_t seed, int n_mc,
                                          int n_starts) {
    map.validate();
    if (max_iter < 1) throw std::invalid_argument("best_response_dynamics: max_iter must be >= 1");
    if (losses.size() != static_cast<std::size_t>(map.firm_count)) {
        throw std::invalid_argument("best_response_dynamics: one loss per firm required");
    }
    const bool exact = (n_mc == 0);
    if (exact && !map.monopoly->has_exact()) {
        throw std::invalid_argument(
            "best_response_dynamics: exact path requested but map has no exact risk");
    }
    RiskTable table(*map.monopoly, grid);

    auto run_from = [&](double init) {
        std::vector<double> profile(static_cast<std::size_t>(map.firm_count), init);
        bool converged = false;
        double residual = 0.0;
        for (int round = 0; round < max_iter; ++round) {
            for (int i = 0; i < map.firm_count; ++i) {
                const std::vector<double> obj =
                    exact ? firm_objective_exact(table, profile, i, map.firm_count, grid)
                          : firm_objective_mc(map, profile, i, grid, losses[static_cast<std::size_t>(i)],
                                              n_mc, seed);
                profile[static_cast<std::size_t>(i)] = grid.at(argmin_smallest(obj));
            }
            // Residual: best unilateral grid improvement against the frozen profile.
            residual = 0.0;
            for (int i = 0; i < map.firm_count; ++i) {
                const std::vector<double> obj =
                    exact ? firm_objective_exact(table, profile, i, map.firm_count, grid)
                          : firm_objective_mc(map, profile, i, grid, losses[static_cast<std::size_t>(i)],
                                              n_mc, seed);
                const double cur = obj[static_cast<std::size_t>(
                    std::llround((profile[static_cast<std::size_t>(i)] - grid.lo) / grid.step))];
                residual = std::max(residual, cur - obj[argmin_smallest(obj)]);
            }
            if (residual < tol) {
                converged = true;
                break;
            }
        }
        return std::make_tuple(profile, residual, converged);
    };

    const double init =
        exact ? ex_ante_optimize_exact(std::nullopt, *map.monopoly, grid).theta
              : ex_ante_optimize(std::nullopt, *map.monopoly, grid, std::max(n_mc, 1), seed).theta;
    auto [profile, residual, converged] = run_from(init);

    EquilibriumProfile out;
    out.thetas = profile;
    out.residual = residual;
    out.converged = converged;
    out.symmetric = std::all_of(profile.begin(), profile.end(),
                                [&](double t) { return t == profile[0]; });

    if (n_starts > 1) {
        auto eng = make_engine(derive_seed(seed, fnv1a("multistart")));
        std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
        std::vector<double> found = {profile[0]};
        for (int s = 1; s < n_starts; ++s) {
            auto [alt, alt_res, alt_conv] = run_from(grid.at(pick(eng)));
            (void)alt_res;
            if (!alt_conv) continue;
            const bool fresh = std::none_of(found.begin(), found.end(), [&](double t) {
                return std::abs(t - alt[0]) < 0.5 * grid.step;
            });
            if (fresh) {
                found.push_back(alt[0]);
                out.multistart_equilibria.push_back(alt[0]);
            }
        }
    }
    return out;
}

EquilibriumSuboptimalityReport check_equilibrium_suboptimality(
    const EquilibriumProfile& profile, const MultiFirmMap& map,
    const std::vector<LossSpec>& losses, const std::vector<PowerEstimate>& power_per_firm,
    const Grid& grid, std::uint64_t seed, int n_mc) {
    map.validate();
    EquilibriumSuboptimalityReport report;
    const bool exact = (n_mc == 0);
    RiskTable table(*map.monopoly, grid);

    for (int i = 0; i < map.firm_count; ++i) {
        const LossSpec& loss = losses[static_cast<std::size_t>(i)];
        const PowerEstimate& pi = power_per_firm[static_cast<std::size_t>(i)];
        FirmSuboptimality row;
        row.firm = i;

        // Risk of any theta on the frozen equilibrium distribution D(profile).
        std::vector<double> frozen(grid.size(), 0.0);
        double at_profile = 0.0;
        if (exact) {
            for (int j = 0; j < map.firm_count; ++j) {
                const auto& r = table.row(profile.thetas[static_cast<std::size_t>(j)]);
                for (std::size_t k = 0; k < grid.size(); ++k) frozen[k] += r[k];
                at_profile += map.monopoly->exact_decoupled_risk(
                    profile.thetas[static_cast<std::size_t>(j)],
                    profile.thetas[static_cast<std::size_t>(i)], loss);
            }
            for (double& v : frozen) v /= static_cast<double>(map.firm_count);
            at_profile /= static_cast<double>(map.firm_count);
            row.slack = 3.0 * pi.ci_halfwidth * loss.lipschitz_z;
        } else {
            std::vector<double> buf(static_cast<std::size_t>(n_mc));
            for (std::size_t k = 0; k < grid.size(); ++k) {
                for (int d = 0; d < n_mc; ++d) {
                    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(d));
                    // acting_firm -1: nobody deviates, D frozen at the profile.
                    buf[static_cast<std::size_t>(d)] =
                        loss.eval(grid.at(k), mixture_draw(map, profile.thetas, -1, std::nullopt, s));
                }
                frozen[k] = mean(buf);
            }
            MeanSe ms;
            {
                for (int d = 0; d < n_mc; ++d) {
                    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(d));
                    buf[static_cast<std::size_t>(d)] = loss.eval(
                        profile.thetas[static_cast<std::size_t>(i)],
                        mixture_draw(map, profile.thetas, -1, std::nullopt, s));
                }
                ms = mean_se(buf);
            }
            at_profile = ms.mean;
            row.slack = 3.0 * (ms.se * std::sqrt(2.0) + pi.ci_halfwidth * loss.lipschitz_z);
        }

        row.risk_at_profile = at_profile;
        row.min_risk = frozen[argmin_smallest(frozen)];
        row.bound = row.min_risk + loss.lipschitz_z * pi.value;
        row.pass = row.risk_at_profile <= row.bound + row.slack;
        report.all_pass = report.all_pass && row.pass;
        report.firms.push_back(row);
    }
    return report;
}

SymmetricEquilibrium symmetric_mixture_equilibrium(const DistributionMap& monopoly, int C,
                                                   const Grid& grid, int max_iter) {
    if (!monopoly.has_exact()) {
        throw std::invalid_argument("symmetric_mixture_equilibrium: map has no exact risk path");
    }
    RiskTable table(monopoly, grid);
    const std::vector<double>& pr = table.pr_row();

    auto next_theta = [&](double theta) {
        const std::vector<double>& row = table.row(theta);
        std::vector<double> obj(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            obj[k] = (pr[k] + static_cast<double>(C - 1) * row[k]) / static_cast<double>(C);
        }
        return argmin_smallest(obj);
    };

    SymmetricEquilibrium out;
    std::size_t k = argmin_smallest(table.row(std::nullopt));  // theta_sl initialization
    std::vector<std::size_t> seen;
    for (int it = 0; it < max_iter; ++it) {
        const std::size_t nk = next_theta(grid.at(k));
        if (nk == k) {
            out.converged = true;
            break;
        }
        if (std::find(seen.begin(), seen.end(), nk) != seen.end()) {
            // Grid-scale limit cycle: keep the member with the smaller objective.
            const std::size_t a = k, b = nk;
            const auto obj_of = [&](std::size_t idx) {
                const auto& row = table.row(grid.at(idx));
                return (pr[idx] + static_cast<double>(C - 1) * row[idx]) / static_cast<double>(C);
            };
            k = (obj_of(a) <= obj_of(b)) ? a : b;
            out.converged = true;
            break;
        }
        seen.push_back(k);
        k = nk;
    }
    out.theta = grid.at(k);
    {
        const std::vector<double>& row = table.row(out.theta);
        std::vector<double> obj(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            obj[i] = (pr[i] + static_cast<double>(C - 1) * row[i]) / static_cast<double>(C);
        }
        const std::size_t cur = static_cast<std::size_t>(std::llround((out.theta - grid.lo) / grid.step));
        out.residual = obj[cur] - obj[argmin_smallest(obj)];
    }
    return out;
}

MixtureTable mixture_convergence_experiment(const DistributionMap& monopoly,
                                            const std::vector<int>& firm_counts,
                                            const Grid& grid, int n_units, int n_rep,
                                            std::uint64_t seed) {
    MixtureTable table;
    RiskTable risks(monopoly, grid);
    std::vector<double> gaps, inv_cs;

    for (int C : firm_counts) {
        MixtureRow row;
        row.firm_count = C;
        const SymmetricEquilibrium eq = symmetric_mixture_equilibrium(monopoly, C, grid);
        row.theta_star = eq.theta;
        row.converged = eq.converged;

        // Gap on the frozen monopoly map at theta*. Differences below the
        // quadrature tolerance are noise, not suboptimality; snap them to 0
        // rather than let their sign order a fake trend.
        const std::vector<double>& frozen = risks.row(eq.theta);
        const double at_star = monopoly.exact_decoupled_risk(eq.theta, eq.theta, monopoly.loss());
        row.gap = at_star - frozen[argmin_smallest(frozen)];
        if (std::abs(row.gap) <= 1e-12) row.gap = 0.0;

        // Monopoly power referenced at the theta* status quo.
        const PowerEstimate p = monopoly_power_at(monopoly, eq.theta, grid, n_units, n_rep,
                                                  derive_seed(seed, static_cast<std::uint64_t>(C)));
        row.bound = monopoly.loss().lipschitz_z * p.value / static_cast<double>(C);
        row.slack = 3.0 * monopoly.loss().lipschitz_z * p.ci_halfwidth / static_cast<double>(C);
        row.pass = row.gap <= row.bound + row.slack;
        table.all_pass = table.all_pass && row.pass && row.converged;
        table.monopoly_power = p.value;

        gaps.push_back(row.gap);
        inv_cs.push_back(1.0 / static_cast<double>(C));
        table.rows.push_back(row);
    }
    table.spearman_gap_vs_inv_c = spearman_rho(gaps, inv_cs);
    return table;
}

CollusionReport collusion_comparison(const DistributionMap& monopoly, const Grid& grid,
                                     std::uint64_t seed) {
    (void)seed;
    CollusionReport report;
    report.theta_po = ex_post_optimize_exact(monopoly, grid).theta;
    report.risk_po = monopoly.exact_decoupled_risk(report.theta_po, report.theta_po,
                                                   monopoly.loss());

    // Retraining displacement: where ex-ante retraining on D(theta) would move.
    auto displacement = [&](double theta) {
        return ex_ante_optimize_exact(theta, monopoly, grid).theta - theta;
    };

    const std::size_t stride = std::max<std::size_t>(1, grid.size() / 24);
    double prev_theta = grid.at(0);
    double prev_d = displacement(prev_theta);
    bool found = false;
    for (std::size_t k = stride; k < grid.size(); k += stride) {
        const double theta = grid.at(k);
        const double d = displacement(theta);
        if (prev_d == 0.0) {
            report.theta_st = prev_theta;
            found = true;
            break;
        }
        if (prev_d * d <= 0.0) {
            report.theta_st = bisect(displacement, prev_theta, theta, 1e-6);
            found = true;
            break;
        }
        prev_theta = theta;
        prev_d = d;
    }
    report.stable_found = found;
    if (found) {
        report.param_gap = std::abs(report.theta_po - report.theta_st);
        report.risk_st = monopoly.exact_decoupled_risk(report.theta_st, report.theta_st,
                                                       monopoly.loss());
    }
    return report;
}

PowerEstimate monopoly_power_at(const DistributionMap& map, std::optional<double> theta_ref,
                                const Grid& grid, int n_units, int n_rep, std::uint64_t seed) {
    Population pop(static_cast<std::size_t>(n_units));
    std::vector<Obs> bases(static_cast<std::size_t>(n_units));
    const std::uint64_t pop_seed = derive_seed(seed, fnv1a("power-population"));
    for (int i = 0; i < n_units; ++i) {
        const std::uint64_t s = derive_seed(pop_seed, static_cast<std::uint64_t>(i));
        bases[static_cast<std::size_t>(i)] = map.draw_base(s);
        pop[static_cast<std::size_t>(i)] =
            Unit{i, DataPoint::scalar(map.z_of(map.apply(bases[static_cast<std::size_t>(i)], theta_ref, s)))};
    }
    const ThresholdActions actions = threshold_actions(grid);
    auto respond = [&map, bases, thetas = actions.thetas](std::size_t ai, const Unit& u,
                                                          std::uint64_t s) {
        const Obs& base = bases[static_cast<std::size_t>(u.id)];
        return DataPoint::scalar(map.z_of(map.apply(base, thetas.at(ai), s)));
    };
    const CounterfactualSimulator sim(pop, respond);
    return estimate_power(sim, actions.set, pop, Metric::absolute_difference(), n_rep, seed);
}

PowerEstimate mixture_per_firm_power(const DistributionMap& monopoly, int C, double theta_star,
                                     const Grid& grid, int n_units, int n_rep,
                                     std::uint64_t seed) {
    Population pop(static_cast<std::size_t>(n_units));
    std::vector<Obs> bases(static_cast<std::size_t>(n_units));
    const std::uint64_t pop_seed = derive_seed(seed, fnv1a("mixture-population"));
    for (int i = 0; i < n_units; ++i) {
        const std::uint64_t s = derive_seed(pop_seed, static_cast<std::uint64_t>(i));
        bases[static_cast<std::size_t>(i)] = monopoly.draw_base(s);
        pop[static_cast<std::size_t>(i)] =
            Unit{i, DataPoint::scalar(monopoly.z_of(monopoly.apply(bases[static_cast<std::size_t>(i)], theta_star, s)))};
    }
    const ThresholdActions actions = threshold_actions(grid);
    auto respond = [&monopoly, bases, C, theta_star, thetas = actions.thetas](
                       std::size_t ai, const Unit& u, std::uint64_t s) {
        const Obs& base = bases[static_cast<std::size_t>(u.id)];
        if (firm_assignment(C, s) != 0) {
            // Unit belongs to another firm, which still deploys theta*; the
            // deviation never reaches it.
            return DataPoint::scalar(monopoly.z_of(monopoly.apply(base, theta_star, s)));
        }
        return DataPoint::scalar(monopoly.z_of(monopoly.apply(base, thetas.at(ai), s)));
    };
    const CounterfactualSimulator sim(pop, respond);
    return estimate_power(sim, actions.set, pop, Metric::absolute_difference(), n_rep, seed);
}

}  // namespace perfpower
