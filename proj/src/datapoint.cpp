#include "perfpower/datapoint.hpp"

#include <cmath>
#include <stdexcept>

namespace perfpower {

DataPoint DataPoint::histogram(std::vector<double> probs) {
    if (!is_simplex(probs)) {
        throw std::invalid_argument("DataPoint::histogram: values are not a probability simplex point");
    }
    return {Kind::Histogram, std::move(probs)};
}

double DataPoint::as_scalar() const {
    if (values.size() != 1) {
        throw std::logic_error("DataPoint::as_scalar: not a scalar point");
    }
    return values[0];
}

bool DataPoint::finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool is_simplex(std::span<const double> probs, double tol) {
    double sum = 0.0;
    for (double p : probs) {
        if (p < -tol) return false;
        sum += p;
    }
    return std::abs(sum - 1.0) <= tol;
}

double l1_histogram_distance(const DataPoint& a, const DataPoint& b) {
    if (a.kind != DataPoint::Kind::Histogram || b.kind != DataPoint::Kind::Histogram) {
        throw std::invalid_argument("l1_histogram_distance: both points must be histograms");
    }
    if (a.values.size() != b.values.size()) {
        throw std::invalid_argument("l1_histogram_distance: length mismatch");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        d += std::abs(a.values[i] - b.values[i]);
    }
    return d;
}

namespace {

double euclidean_distance(const DataPoint& a, const DataPoint& b) {
    if (a.values.size() != b.values.size()) {
        throw std::invalid_argument("euclidean metric: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

Metric Metric::absolute_difference() {
    return Metric(Kind::AbsoluteDifference, "absolute-difference",
                  [](const DataPoint& a, const DataPoint& b) {
                      return std::abs(a.as_scalar() - b.as_scalar());
                  });
}

Metric Metric::euclidean() {
    return Metric(Kind::Euclidean, "euclidean", euclidean_distance);
}

Metric Metric::l1_histogram() {
    return Metric(Kind::L1Histogram, "l1-histogram", l1_histogram_distance);
}

Metric Metric::custom(Fn fn, std::string name) {
    return Metric(Kind::Custom, std::move(name), std::move(fn));
}

double Metric::operator()(const DataPoint& a, const DataPoint& b) const {
    return fn_(a, b);
}

}  // namespace perfpower
