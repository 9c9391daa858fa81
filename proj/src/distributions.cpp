#include "perfpower/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace perfpower {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double Posterior::operator()(double x) const {
    const double t = slope * x + shift;
    switch (kind) {
        case Kind::Logistic:
            return 1.0 / (1.0 + std::exp(-t));
        case Kind::NormalCdf:
            return normal_cdf(t);
    }
    return 0.0;
}

void Posterior::validate() const {
    if (slope <= 0.0) {
        throw std::invalid_argument("Posterior: slope must be positive");
    }
    // Numerical regularity check: increasing across +-10 scale units and
    // saturating towards 0 and 1.
    const double scale = 1.0 / slope;
    const double x0 = -shift / slope;
    double prev = (*this)(x0 - 10.0 * scale);
    for (int i = -9; i <= 10; ++i) {
        const double cur = (*this)(x0 + i * scale);
        if (cur < prev) throw std::invalid_argument("Posterior: not increasing");
        prev = cur;
    }
    if ((*this)(x0 - 10.0 * scale) > 0.01 || (*this)(x0 + 10.0 * scale) < 0.99) {
        throw std::invalid_argument("Posterior: limits 0/1 not reached within 10 scale units");
    }
}

double BaseDistribution::pdf(double x) const {
    switch (family) {
        case Family::Uniform:
            return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
        case Family::Normal: {
            const double z = (x - a) / b;
            return std::exp(-0.5 * z * z) / (b * std::sqrt(2.0 * M_PI));
        }
        case Family::Logistic: {
            const double e = std::exp(-(x - a) / b);
            return e / (b * (1.0 + e) * (1.0 + e));
        }
    }
    return 0.0;
}

double BaseDistribution::cdf(double x) const {
    switch (family) {
        case Family::Uniform:
            if (x <= a) return 0.0;
            if (x >= b) return 1.0;
            return (x - a) / (b - a);
        case Family::Normal:
            return normal_cdf((x - a) / b);
        case Family::Logistic:
            return 1.0 / (1.0 + std::exp(-(x - a) / b));
    }
    return 0.0;
}

double BaseDistribution::sample(std::mt19937_64& eng) const {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    switch (family) {
        case Family::Uniform:
            return a + (b - a) * u01(eng);
        case Family::Normal: {
            std::normal_distribution<double> n(a, b);
            return n(eng);
        }
        case Family::Logistic: {
            double u = u01(eng);
            // Guard the open interval; inverse-CDF sampling.
            u = std::min(std::max(u, 1e-16), 1.0 - 1e-16);
            return a + b * std::log(u / (1.0 - u));
        }
    }
    return 0.0;
}

std::pair<double, double> BaseDistribution::quad_support() const {
    switch (family) {
        case Family::Uniform:
            return {a, b};
        case Family::Normal:
            return {a - 14.0 * b, a + 14.0 * b};
        case Family::Logistic:
            return {a - 45.0 * b, a + 45.0 * b};
    }
    return {0.0, 0.0};
}

void BaseDistribution::validate() const {
    switch (family) {
        case Family::Uniform:
            if (!(b > a)) throw std::invalid_argument("uniform base: requires b > a");
            break;
        case Family::Normal:
        case Family::Logistic:
            if (!(b > 0.0)) throw std::invalid_argument("base: scale must be positive");
            break;
    }
    posterior.validate();
}

std::string BaseDistribution::describe() const {
    char buf[96];
    const char* names[] = {"uniform", "normal", "logistic"};
    std::snprintf(buf, sizeof(buf), "%s(%.17g, %.17g)", names[static_cast<int>(family)], a, b);
    return buf;
}

}  // namespace perfpower
