#include "regflow/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace regflow {

namespace {

double product(double v) { return v * (1.0 - v); }

void require_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConstructionError(std::string(what) + ": value outside [0, 1]");
}

const std::vector<double> kNoBreaks;

} // namespace

LambdaSchedule::LambdaSchedule(Variant v) : schedule_(std::move(v)) {
    std::visit(
        [this](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ConstantLambda>) {
                inf_value_ = s.value;
                inf_product_ = product(s.value);
            } else if constexpr (std::is_same_v<S, PiecewiseLambda>) {
                inf_value_ = *std::min_element(s.values.begin(), s.values.end());
                inf_product_ = product(s.values.front());
                for (double v : s.values) inf_product_ = std::min(inf_product_, product(v));
            } else {
                // The sine sweeps the whole interval [offset - |amp|, offset + |amp|] (when omega != 0);
                // v(1-v) is concave, so its infimum sits at an endpoint of the clipped range.
                double lo = s.offset;
                double hi = s.offset;
                if (s.omega != 0.0) {
                    lo -= std::abs(s.amplitude);
                    hi += std::abs(s.amplitude);
                } else {
                    lo = hi = s.offset + s.amplitude * std::sin(s.phase);
                }
                lo = std::clamp(lo, 0.0, 1.0);
                hi = std::clamp(hi, 0.0, 1.0);
                inf_value_ = lo;
                inf_product_ = std::min(product(lo), product(hi));
            }
        },
        schedule_);
}

LambdaSchedule LambdaSchedule::constant(double v) {
    require_unit(v, "constant schedule");
    return LambdaSchedule(ConstantLambda{v});
}

LambdaSchedule LambdaSchedule::piecewise(std::vector<double> breakpoints, std::vector<double> values) {
    if (values.size() != breakpoints.size() + 1) {
        throw ConstructionError("piecewise schedule: need exactly one more value than breakpoints");
    }
    for (double v : values) require_unit(v, "piecewise schedule");
    double prev = 0.0;
    for (double b : breakpoints) {
        if (!std::isfinite(b) || !(b > prev)) {
            throw ConstructionError("piecewise schedule: breakpoints must be positive and strictly increasing");
        }
        prev = b;
    }
    return LambdaSchedule(PiecewiseLambda{std::move(breakpoints), std::move(values)});
}

LambdaSchedule LambdaSchedule::sine(double offset, double amplitude, double omega, double phase) {
    if (!std::isfinite(offset) || !std::isfinite(amplitude) || !std::isfinite(omega) || !std::isfinite(phase)) {
        throw ConstructionError("sine schedule: non-finite parameter");
    }
    return LambdaSchedule(SineLambda{offset, amplitude, omega, phase});
}

double LambdaSchedule::operator()(double t) const {
    return std::visit(
        [t](const auto& s) -> double {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ConstantLambda>) {
                return s.value;
            } else if constexpr (std::is_same_v<S, PiecewiseLambda>) {
                const auto it = std::upper_bound(s.breakpoints.begin(), s.breakpoints.end(), t);
                return s.values[static_cast<std::size_t>(it - s.breakpoints.begin())];
            } else {
                return std::clamp(s.offset + s.amplitude * std::sin(s.omega * t + s.phase), 0.0, 1.0);
            }
        },
        schedule_);
}

const std::vector<double>& LambdaSchedule::discontinuities() const noexcept {
    if (const auto* p = std::get_if<PiecewiseLambda>(&schedule_)) return p->breakpoints;
    return kNoBreaks;
}

bool LambdaSchedule::is_piecewise_constant() const noexcept { return !std::holds_alternative<SineLambda>(schedule_); }

bool LambdaSchedule::aligned_to_integers() const noexcept {
    if (!is_piecewise_constant()) return false;
    const auto& b = discontinuities();
    return std::all_of(b.begin(), b.end(), [](double t) { return t == std::floor(t); });
}

bool LambdaSchedule::product_integral_diverges() const {
    return std::visit(
        [](const auto& s) -> bool {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ConstantLambda>) {
                return product(s.value) > 0.0;
            } else if constexpr (std::is_same_v<S, PiecewiseLambda>) {
                return product(s.values.back()) > 0.0;
            } else {
                if (s.omega == 0.0) return product(std::clamp(s.offset + s.amplitude * std::sin(s.phase), 0.0, 1.0)) > 0.0;
                // Periodic: diverges iff the mean over one period is positive.
                const int n = 4096;
                const double period = 2.0 * std::numbers::pi / std::abs(s.omega);
                double acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double t = (i + 0.5) * period / n;
                    acc += product(std::clamp(s.offset + s.amplitude * std::sin(s.omega * t + s.phase), 0.0, 1.0));
                }
                return acc > 0.0;
            }
        },
        schedule_);
}

} // namespace regflow
