#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "regflow/flow.hpp"
#include "regflow/regularity.hpp"

namespace regflow {

enum class DecayModel { exponential, powerlaw };
enum class DecayMetric { residual, dist_fix, dist_to_limit };

/// exponential: metric ~ M exp(-rate t); powerlaw: metric ~ M t^(-rate).
struct RateFit {
    DecayModel model = DecayModel::exponential;
    double M = 0.0;
    double rate = 0.0;
    /// Residual sum of squares in the model's log space.
    double rss = 0.0;
    int n_points = 0;
    double t_min = 0.0;
    double t_max = 0.0;
    /// The metric vanished on the whole window: nothing left to fit. M and rate are 0.
    bool already_converged = false;
};

struct FitWindow {
    std::optional<double> t_min;
    std::optional<double> t_max;
};

inline constexpr int kMinFitPoints = 10;
/// Default window: last 80% of the samples whose metric exceeds this floor.
inline constexpr double kFitFloor = 1e-13;

[[nodiscard]] double metric_value(const Trajectory& traj, std::size_t i, DecayMetric metric);

/// Least squares of log(metric) against t (exponential) or log t (powerlaw, t >= 1 only).
[[nodiscard]] RateFit fit_decay(const Trajectory& traj, DecayMetric metric, DecayModel model,
                                const FitWindow& window = {});

struct ModelSelection {
    RateFit exponential;
    RateFit powerlaw;
    DecayModel chosen = DecayModel::exponential;
};

/// Fits both models on the same samples and keeps the one with the smaller rss per point.
[[nodiscard]] ModelSelection select_model(const Trajectory& traj, DecayMetric metric, const FitWindow& window = {});

/// margin = bound - observed; passed iff worst_margin >= -tolerance.
struct BoundCheck {
    std::string bound_name;
    int n_points = 0;
    double worst_margin = 0.0;
    double tolerance = 0.0;
    bool passed = true;
};

/// The three exponential-regime inequalities:
///   d^2(x(t), Fix) <= exp(-(lam*/kappa^2) t) d0^2
///   ||x(t) - xbar|| <= 2 d(x(t), Fix)
///   ||x(t) - xbar|| <= 2 exp(-(lam*/(2 kappa^2)) t) d0
[[nodiscard]] std::array<BoundCheck, 3> check_linear_rate_bound(const Trajectory& traj, double kappa,
                                                               const LambdaSchedule& schedule, double d0, double tol);

/// Exponent of the sublinear rate, gamma / (2 (1 - gamma)).
[[nodiscard]] double hoelder_rate_exponent(double gamma);
/// Constant M with u(t) <= M t^(-gamma/(1-gamma)) whenever u' <= -alpha u^(1/gamma).
[[nodiscard]] double bihari_constant(double alpha, double gamma);

struct HoelderBoundResult {
    /// d(x(t), Fix) <= M0 t^(-exponent), M0 the square root of the comparison constant for u = d^2
    /// with alpha = lam* / kappa^(2/gamma).
    double M0 = 0.0;
    double exponent = 0.0;
    std::array<BoundCheck, 2> checks;
};

/// Checks d(x(t)) <= M0 t^-exponent and ||x(t) - xbar|| <= 2 M0 t^-exponent for t >= t_min.
[[nodiscard]] HoelderBoundResult check_hoelder_rate_bound(const Trajectory& traj, double kappa, double gamma,
                                                          const LambdaSchedule& schedule, double tol,
                                                          double t_min = 1.0);

struct ComparisonReports {
    /// u' = -alpha u against u0 exp(-alpha t).
    InequalityReport gronwall;
    /// Integrated solution equals the bound to integrator tolerance.
    InequalityReport gronwall_equality;
    /// u' = -alpha u^(1/gamma) against M t^(-gamma/(1-gamma)).
    InequalityReport bihari_lasalle;
    /// Integrated solution against the closed form (u0^(1-1/g) + (1/g - 1) alpha t)^(-g/(1-g)).
    InequalityReport bihari_closed_form;
};

[[nodiscard]] ComparisonReports verify_comparison_lemmas(double alpha, double gamma, double u0, double t_end);

} // namespace regflow
