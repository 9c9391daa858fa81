#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace perfpower {

// One participant data point: a scalar, a feature vector, or a consumption
// histogram (point in the probability simplex).
struct DataPoint {
    enum class Kind { Scalar, Vector, Histogram };

    Kind kind = Kind::Scalar;
    std::vector<double> values;

    static DataPoint scalar(double x) { return {Kind::Scalar, {x}}; }
    static DataPoint vec(std::vector<double> v) { return {Kind::Vector, std::move(v)}; }
    static DataPoint histogram(std::vector<double> probs);  // validates simplex

    double as_scalar() const;
    bool finite() const;
};

bool is_simplex(std::span<const double> probs, double tol = 1e-9);

struct Unit {
    int id = 0;
    DataPoint z_current;
};

using Population = std::vector<Unit>;

// Coordinate-wise |a-b| sum between two histograms; range [0, 2].
double l1_histogram_distance(const DataPoint& a, const DataPoint& b);

// Distance over data points. The shipped kinds are metrics by construction;
// Custom wraps a user-supplied table or callable.
class Metric {
  public:
    enum class Kind { AbsoluteDifference, Euclidean, L1Histogram, Custom };
    using Fn = std::function<double(const DataPoint&, const DataPoint&)>;

    static Metric absolute_difference();
    static Metric euclidean();
    static Metric l1_histogram();
    static Metric custom(Fn fn, std::string name);

    double operator()(const DataPoint& a, const DataPoint& b) const;
    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }

  private:
    Metric(Kind k, std::string name, Fn fn)
        : kind_(k), name_(std::move(name)), fn_(std::move(fn)) {}
    Kind kind_;
    std::string name_;
    Fn fn_;
};

}  // namespace perfpower
