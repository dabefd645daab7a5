#pragma once

#include <variant>

#include "regflow/sets.hpp"

namespace regflow {

struct Indicator {
    PrimitiveSet set;
};

/// weight * ||x||_1
struct L1Norm {
    double weight;
};

/// f(z) = 1/2 <z, Qz> - <c, z>, Q symmetric positive semidefinite.
struct Quadratic {
    Matrix Q;
    Point c;
};

/// Proper lsc convex function with a closed-form proximal map.
class SimpleFunction {
public:
    using Variant = std::variant<Indicator, L1Norm, Quadratic>;

    static SimpleFunction indicator(PrimitiveSet set);
    static SimpleFunction l1(double weight);
    static SimpleFunction quadratic(Matrix Q, Point c);

    [[nodiscard]] const Variant& variant() const noexcept { return fn_; }
    /// Zero for L1Norm, which is dimension-agnostic.
    [[nodiscard]] Eigen::Index dim() const noexcept;
    /// Function value; +inf outside the set for indicators.
    [[nodiscard]] double value(const Point& x) const;

private:
    explicit SimpleFunction(Variant v) : fn_(std::move(v)) {}
    Variant fn_;
};

/// argmin_z { step * fn(z) + 1/2 ||z - x||^2 }.
[[nodiscard]] Point prox(const SimpleFunction& fn, double step, const Point& x);

} // namespace regflow
