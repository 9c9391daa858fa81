#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace perfpower {

// Uniform 1-d grid of candidate parameters, inclusive of both ends.
struct Grid {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    std::size_t size() const;
    double at(std::size_t i) const { return lo + static_cast<double>(i) * step; }
    std::vector<double> values() const;
};

// Bisection root of f on [lo, hi]; requires a sign change. Stops when the
// bracket is narrower than xtol or |f| <= ftol.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol = 1e-12, double ftol = 0.0, int max_iter = 200);

// Expands [hi - span, hi] downward (doubling span) until f changes sign.
// Returns the bracket lower end. Throws if max_doublings is exhausted.
double expand_bracket_down(const std::function<double(double)>& f, double hi,
                           double initial_span, int max_doublings = 60);

// Adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol = 1e-10, int max_depth = 40);

// Golden-section minimizer for unimodal objectives.
double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double xtol = 1e-10, int max_iter = 200);

}  // namespace perfpower
