#pragma once

#include <functional>
#include <span>

#include "regflow/point.hpp"

namespace regflow::ode {

using Rhs = std::function<Point(double t, const Point& y)>;
/// Called at every requested output time with the state there.
using Observer = std::function<void(double t, const Point& y)>;

class StepSizeUnderflow : public NumericError {
public:
    StepSizeUnderflow(const std::string& what, double t) : NumericError(what), t_(t) {}
    [[nodiscard]] double time() const noexcept { return t_; }

private:
    double t_;
};

struct AdaptiveOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double min_step = 1e-14;
    /// Initial step guess; <= 0 selects one from the local scale of the problem.
    double initial_step = 0.0;
};

struct AdaptiveStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    /// Largest accepted scaled error norm (<= 1 by construction).
    double max_error_norm = 0.0;
    /// Largest accepted local error estimate in the max norm.
    double max_local_error = 0.0;
    /// Last accepted step, reusable as the next segment's initial guess.
    double last_step = 0.0;
};

/// Dormand-Prince 5(4) from t0 up to the last entry of `stops`, landing exactly on every stop.
/// `stops` must be strictly increasing and greater than t0. Returns the final state.
Point dormand_prince(const Rhs& f, double t0, Point y, std::span<const double> stops, const AdaptiveOptions& opts,
                     const Observer& observe, AdaptiveStats& stats);

/// Classic fourth-order Runge-Kutta step.
Point rk4_step(const Rhs& f, double t, const Point& y, double h);

/// Explicit Euler step.
Point euler_step(const Rhs& f, double t, const Point& y, double h);

} // namespace regflow::ode
