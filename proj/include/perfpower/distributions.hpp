#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>

namespace perfpower {

// Monotone posterior p(x) = P[Y = 1 | X = x], parameterized as link(slope*x + shift)
// with a logistic or normal-CDF link. slope > 0 keeps it strictly increasing
// with limits 0 and 1.
struct Posterior {
    enum class Kind { Logistic, NormalCdf };

    Kind kind = Kind::Logistic;
    double slope = 1.0;
    double shift = 0.0;

    double operator()(double x) const;
    void validate() const;  // monotone increasing, limits checked at +-10 scale units
};

// Base feature distribution with an attached posterior.
struct BaseDistribution {
    enum class Family { Uniform, Normal, Logistic };

    Family family = Family::Uniform;
    double a = 0.0;  // uniform: lower end; normal: mean; logistic: location
    double b = 1.0;  // uniform: upper end; normal: sd;   logistic: scale
    Posterior posterior;

    double pdf(double x) const;
    double cdf(double x) const;
    double sample(std::mt19937_64& eng) const;

    // Integration bounds: exact support for uniform, clipped tails otherwise
    // (tail mass far below every tolerance used in this project).
    std::pair<double, double> quad_support() const;

    void validate() const;
    std::string describe() const;
};

double normal_cdf(double z);

}  // namespace perfpower
