#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace perfpower {

// Pairwise (tree) summation. Fixed reduction order keeps results bit-identical
// no matter how the terms were produced, and the error grows like O(log n).
double pairwise_sum(std::span<const double> xs);

inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return pairwise_sum(xs) / static_cast<double>(xs.size());
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean, normal approximation
    std::size_t n = 0;
};

MeanSe mean_se(std::span<const double> xs);

// Spearman rank correlation; average ranks on ties.
double spearman_rho(std::span<const double> a, std::span<const double> b);

}  // namespace perfpower
