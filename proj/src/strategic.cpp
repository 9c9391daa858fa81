#include "perfpower/strategic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "perfpower/rng.hpp"
#include "perfpower/stats.hpp"

namespace perfpower {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DataPoint to_point(const std::vector<double>& x) {
    if (x.size() == 1) return DataPoint::scalar(x[0]);
    return DataPoint::vec(x);
}

}  // namespace

CostModel CostModel::absolute_difference(std::vector<int> immutable_coords) {
    CostModel c;
    c.kind_ = Kind::AbsoluteDifference;
    c.immutable_ = std::move(immutable_coords);
    return c;
}

CostModel CostModel::weighted_l1(std::vector<double> weights, std::vector<int> immutable_coords) {
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("CostModel: weights must be positive");
    }
    CostModel c;
    c.kind_ = Kind::WeightedL1;
    c.weights_ = std::move(weights);
    c.immutable_ = std::move(immutable_coords);
    return c;
}

CostModel CostModel::quadratic_1d() {
    CostModel c;
    c.kind_ = Kind::Quadratic1d;
    return c;
}

double CostModel::weight(std::size_t coord) const {
    if (kind_ == Kind::WeightedL1 && coord < weights_.size()) return weights_[coord];
    return 1.0;
}

bool CostModel::coord_immutable(std::size_t coord) const {
    return std::find(immutable_.begin(), immutable_.end(), static_cast<int>(coord)) !=
           immutable_.end();
}

double CostModel::operator()(std::span<const double> a, std::span<const double> b) const {
    if (a.size() != b.size()) throw std::invalid_argument("CostModel: dimension mismatch");
    if (kind_ == Kind::Quadratic1d) {
        const double d = b[0] - a[0];
        return d * d;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i] && coord_immutable(i)) return kInf;
        total += weight(i) * std::abs(a[i] - b[i]);
    }
    return total;
}

double CostModel::scalar(double a, double b) const {
    if (kind_ == Kind::Quadratic1d) return (b - a) * (b - a);
    return weight(0) * std::abs(a - b);
}

Predictor threshold_predictor(double theta) {
    Predictor f;
    f.label = threshold_label(theta);
    f.accepts = [theta](const std::vector<double>& x) { return x[0] >= theta; };
    f.acceptance_candidates = {{theta}};
    return f;
}

std::vector<double> best_response(const ParticipantRecord& p, const Predictor& f,
                                  const UtilitySpec& u, const CostModel& c) {
    if (!c.is_metric()) {
        throw std::invalid_argument("best_response: cost model must be a metric");
    }
    if (f.accepts(p.x_orig)) return p.x_orig;  // positive outcome at zero cost

    double best_cost = kInf;
    const std::vector<double>* best = nullptr;
    for (const auto& cand : f.acceptance_candidates) {
        if (!f.accepts(cand)) continue;
        const double cost = c(p.x_orig, cand);
        if (cost < best_cost || (cost == best_cost && best && cand < *best)) {
            best_cost = cost;
            best = &cand;
        }
    }
    // Moves iff the cheapest accepted point is affordable; exact-budget ties
    // move. The 1e-12 slack absorbs round-off when the budget ball vertex is
    // reconstructed from coordinates.
    if (best != nullptr && best_cost <= u.delta_gamma() + 1e-12) return *best;
    return p.x_orig;
}

double best_response_1d(double x_orig, double theta, double delta_gamma, const CostModel& c) {
    if (x_orig >= theta) return x_orig;
    if (c.scalar(x_orig, theta) <= delta_gamma) return theta;
    return x_orig;
}

namespace {

// Vertices of the budget ball {x' : c(x_orig, x') <= dg} along each mutable
// coordinate; the shipped metric dists attain their sup over the ball there.
std::vector<std::vector<double>> budget_ball_vertices(const std::vector<double>& x_orig,
                                                      double dg, const CostModel& c) {
    std::vector<std::vector<double>> verts;
    verts.push_back(x_orig);
    if (dg <= 0.0) return verts;
    for (std::size_t i = 0; i < x_orig.size(); ++i) {
        if (c.coord_immutable(i)) continue;
        const double radius = dg / c.weight(i);
        for (double sign : {-1.0, 1.0}) {
            std::vector<double> v = x_orig;
            v[i] += sign * radius;
            verts.push_back(std::move(v));
        }
    }
    return verts;
}

}  // namespace

double reachable_sup(const ParticipantRecord& p, const UtilitySpec& u, const CostModel& c,
                     const Metric& dist) {
    const auto verts = budget_ball_vertices(p.x_orig, u.delta_gamma(), c);
    const DataPoint cur = to_point(p.x_current);
    double best = 0.0;
    for (const auto& v : verts) best = std::max(best, dist(cur, to_point(v)));
    return best;
}

std::vector<double> reachable_argmax(const ParticipantRecord& p, const UtilitySpec& u,
                                     const CostModel& c, const Metric& dist) {
    const auto verts = budget_ball_vertices(p.x_orig, u.delta_gamma(), c);
    const DataPoint cur = to_point(p.x_current);
    double best = -1.0;
    std::vector<double> arg = p.x_orig;
    for (const auto& v : verts) {
        const double d = dist(cur, to_point(v));
        if (d > best || (d == best && v < arg)) {
            best = d;
            arg = v;
        }
    }
    return arg;
}

double monopoly_upper_bound(const std::vector<ParticipantRecord>& pop, const UtilitySpec& u,
                            const CostModel& c, const Metric& dist) {
    return monopoly_upper_bound(pop, std::vector<UtilitySpec>(pop.size(), u), c, dist);
}

double monopoly_upper_bound(const std::vector<ParticipantRecord>& pop,
                            const std::vector<UtilitySpec>& per_unit, const CostModel& c,
                            const Metric& dist) {
    if (pop.empty()) throw std::invalid_argument("monopoly_upper_bound: empty population");
    if (per_unit.size() != pop.size()) {
        throw std::invalid_argument("monopoly_upper_bound: utility count mismatch");
    }
    std::vector<double> sups(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        sups[i] = reachable_sup(pop[i], per_unit[i], c, dist);
    }
    return mean(sups);
}

PowerEstimate personalized_power(const std::vector<ParticipantRecord>& pop, const UtilitySpec& u,
                                 const CostModel& c, const Metric& dist) {
    return personalized_power(pop, std::vector<UtilitySpec>(pop.size(), u), c, dist);
}

PowerEstimate personalized_power(const std::vector<ParticipantRecord>& pop,
                                 const std::vector<UtilitySpec>& per_unit, const CostModel& c,
                                 const Metric& dist) {
    if (pop.empty()) throw std::invalid_argument("personalized_power: empty population");
    if (per_unit.size() != pop.size()) {
        throw std::invalid_argument("personalized_power: utility count mismatch");
    }
    if (!c.coord_immutable(0)) {
        throw std::invalid_argument("personalized_power: coordinate 0 (unit id) must be immutable");
    }
    for (const auto& p : pop) {
        if (p.x_orig.empty() || p.x_orig[0] != static_cast<double>(p.id) ||
            p.x_current[0] != static_cast<double>(p.id)) {
            throw std::invalid_argument(
                "personalized_power: coordinate 0 must equal the unit id");
        }
    }

    // Personalized predictor: accept exactly each unit's farthest reachable
    // point, looked up through the immutable id coordinate.
    std::vector<std::vector<double>> targets(pop.size());
    std::unordered_map<int, std::size_t> by_id;
    by_id.reserve(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        targets[i] = reachable_argmax(pop[i], per_unit[i], c, dist);
        by_id.emplace(pop[i].id, i);
    }

    Predictor fstar;
    fstar.label = "personalized-f*";
    fstar.accepts = [targets, by_id](const std::vector<double>& x) {
        const auto it = by_id.find(static_cast<int>(x[0]));
        return it != by_id.end() && static_cast<double>(it->first) == x[0] &&
               x == targets[it->second];
    };
    fstar.acceptance_candidates = targets;

    std::vector<double> moved(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const auto xf = best_response(pop[i], fstar, per_unit[i], c);
        moved[i] = dist(to_point(pop[i].x_current), to_point(xf));
    }

    PowerEstimate est;
    est.value = mean(moved);
    est.kind = PowerEstimate::Kind::ExactMc;
    est.ci_halfwidth = 0.0;
    est.argmax_action = fstar.label;
    est.n_replicates = 1;
    return est;
}

double solve_theta_sl(const BaseDistribution& base) {
    const Posterior& p = base.posterior;
    auto f = [&p](double x) { return p(x) - 0.5; };
    const double center = -p.shift / p.slope;
    double span = 1.0 / p.slope;
    double lo = center - span, hi = center + span;
    for (int k = 0; k < 60 && f(lo) * f(hi) > 0.0; ++k) {
        span *= 2.0;
        lo = center - span;
        hi = center + span;
    }
    if (f(lo) * f(hi) > 0.0) {
        throw std::runtime_error("solve_theta_sl: posterior never crosses 1/2 on the bracket");
    }
    return bisect(f, lo, hi, 1e-9);
}

std::pair<double, double> one_d_bounds(const BaseDistribution& base, double theta_sl,
                                       double delta_gamma) {
    if (delta_gamma <= 0.0) return {0.0, 0.0};
    const double mass = adaptive_simpson([&base](double x) { return base.pdf(x); }, theta_sl,
                                         theta_sl + 0.5 * delta_gamma, 1e-10);
    return {0.5 * delta_gamma * mass, 2.0 * delta_gamma};
}

OneDBoundsReport one_d_bounds_report(const BaseDistribution& base, double theta_sl,
                                     const UtilitySpec& u) {
    OneDBoundsReport r;
    const double dg = u.delta_gamma();
    auto [lower, upper] = one_d_bounds(base, theta_sl, dg);
    r.lower = lower;
    r.upper = upper;
    r.interval_mass = (dg > 0.0) ? lower / (0.5 * dg) : 0.0;
    r.lower_gamma_variant = 0.5 * u.gamma * r.interval_mass;
    r.upper_tight_variant = dg;
    return r;
}

std::vector<ParticipantRecord> sample_population(const Strategic1dScenario& sc) {
    auto eng = make_engine(derive_seed(sc.master_seed, fnv1a("strategic-population")));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<ParticipantRecord> pop(static_cast<std::size_t>(sc.n_units));
    for (int i = 0; i < sc.n_units; ++i) {
        const double x = sc.base.sample(eng);
        ParticipantRecord& p = pop[static_cast<std::size_t>(i)];
        p.id = i;
        p.x_orig = {x};
        p.x_current = {x};
        p.y = (u01(eng) < sc.base.posterior(x)) ? 1 : 0;
    }
    return pop;
}

void deploy_threshold(std::vector<ParticipantRecord>& pop, double theta, const UtilitySpec& u,
                      const CostModel& c) {
    for (auto& p : pop) {
        p.x_current = {best_response_1d(p.x_orig[0], theta, u.delta_gamma(), c)};
    }
}

std::string threshold_label(double theta) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "theta=%.17g", theta);
    return buf;
}

ThresholdActions threshold_actions(const Grid& grid, bool exhaustive) {
    ThresholdActions out;
    out.thetas = grid.values();
    out.set.exhaustive = exhaustive;
    out.set.labels.reserve(out.thetas.size());
    for (double t : out.thetas) out.set.labels.push_back(threshold_label(t));
    return out;
}

Population to_power_population(const std::vector<ParticipantRecord>& pop) {
    Population units(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        units[i] = Unit{pop[i].id, DataPoint::scalar(pop[i].x_current[0])};
    }
    return units;
}

CounterfactualSimulator make_threshold_simulator(const std::vector<ParticipantRecord>& pop,
                                                 const ThresholdActions& actions,
                                                 const UtilitySpec& u, const CostModel& c) {
    std::vector<double> x_orig(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) x_orig[i] = pop[i].x_orig[0];
    const double dg = u.delta_gamma();
    const std::vector<double> thetas = actions.thetas;
    auto respond = [x_orig, thetas, dg, c](std::size_t ai, const Unit& unit,
                                           std::uint64_t /*seed*/) {
        const double x = x_orig.at(static_cast<std::size_t>(unit.id));
        return DataPoint::scalar(best_response_1d(x, thetas.at(ai), dg, c));
    };
    return CounterfactualSimulator(to_power_population(pop), respond);
}

}  // namespace perfpower
