#pragma once

#include <variant>
#include <vector>

#include "regflow/errors.hpp"

namespace regflow {

struct ConstantLambda {
    double value;
};

/// lambda(t) = values[k] on [breakpoints[k-1], breakpoints[k]), with breakpoints[-1] = 0
/// and breakpoints[size] = +inf. values.size() == breakpoints.size() + 1.
struct PiecewiseLambda {
    std::vector<double> breakpoints;
    std::vector<double> values;
};

/// lambda(t) = clip(offset + amplitude * sin(omega t + phase), 0, 1).
struct SineLambda {
    double offset;
    double amplitude;
    double omega;
    double phase;
};

/// Measurable relaxation function lambda : [0, inf) -> [0, 1].
class LambdaSchedule {
public:
    using Variant = std::variant<ConstantLambda, PiecewiseLambda, SineLambda>;

    static LambdaSchedule constant(double v);
    static LambdaSchedule piecewise(std::vector<double> breakpoints, std::vector<double> values);
    static LambdaSchedule sine(double offset, double amplitude, double omega, double phase = 0.0);

    [[nodiscard]] double operator()(double t) const;

    /// inf over t >= 0 of lambda(t).
    [[nodiscard]] double inf_value() const noexcept { return inf_value_; }
    /// inf over t >= 0 of lambda(t)(1 - lambda(t)).
    [[nodiscard]] double inf_product() const noexcept { return inf_product_; }

    /// Times where lambda may jump; empty for continuous schedules.
    [[nodiscard]] const std::vector<double>& discontinuities() const noexcept;
    /// True when lambda is constant between consecutive discontinuities.
    [[nodiscard]] bool is_piecewise_constant() const noexcept;
    /// Piecewise constant with every breakpoint on an integer time.
    [[nodiscard]] bool aligned_to_integers() const noexcept;
    /// Whether the integral of lambda(1 - lambda) over [0, inf) diverges.
    [[nodiscard]] bool product_integral_diverges() const;

    [[nodiscard]] const Variant& variant() const noexcept { return schedule_; }

private:
    explicit LambdaSchedule(Variant v);
    Variant schedule_;
    double inf_value_ = 0.0;
    double inf_product_ = 0.0;
};

} // namespace regflow
