#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "regflow/operator.hpp"
#include "regflow/schedule.hpp"

namespace regflow {

/// Unit-step explicit Euler; coincides with the Krasnoselskii-Mann update.
struct EulerUnit {};
struct EulerFixed {
    double h;
};
struct RK4Fixed {
    double h;
};
struct RK45Adaptive {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
};

using IntegratorMethod = std::variant<EulerUnit, EulerFixed, RK4Fixed, RK45Adaptive>;

struct IntegratorConfig {
    IntegratorMethod method = RK45Adaptive{};
    double t_end = 1.0;
    /// Record every n-th step. Ignored when sample_times is non-empty.
    int sample_stride = 1;
    /// Explicit output times in (0, t_end]; steps are shortened to land on them.
    std::vector<double> sample_times;
};

/// k * dt for k = 1.. while <= t_end (t_end itself is always included).
[[nodiscard]] std::vector<double> uniform_times(double dt, double t_end);
/// `count` times log-spaced between t_min and t_end.
[[nodiscard]] std::vector<double> log_times(double t_min, double t_end, int count);

struct TrajectorySample {
    double t = 0.0;
    Point x;
    double residual = 0.0;
    std::optional<double> dist_fix;
    /// ||xdot|| = lambda(t) * residual
    double speed = 0.0;
};

enum class TrajectoryMode { continuous, discrete };

inline constexpr double kDefaultLimitTol = 1e-9;

struct Trajectory {
    std::vector<TrajectorySample> samples;
    TrajectoryMode mode = TrajectoryMode::continuous;
    LambdaSchedule schedule = LambdaSchedule::constant(1.0);
    /// Final iterate, when its residual is below the limit tolerance.
    std::optional<Point> limit_estimate;
    /// Adaptive runs: largest accepted local error estimate.
    std::optional<double> achieved_error;
};

/// Integration stopped early; `partial()` holds the samples recorded so far.
class IntegrationError : public NumericError {
public:
    IntegrationError(const std::string& what, Trajectory partial) : NumericError(what), partial_(std::move(partial)) {}
    [[nodiscard]] const Trajectory& partial() const noexcept { return partial_; }

private:
    Trajectory partial_;
};

/// x_{k+1} = (1 - lam) x_k + lam T(x_k), in exactly this algebraic form.
[[nodiscard]] Point km_step(const Point& x, double lam, const Point& tx);

/// Approximates the strong global solution of xdot = lambda(t) (T(x) - x), x(0) = x0.
/// Integration restarts at every discontinuity of lambda.
[[nodiscard]] Trajectory integrate_flow(const Operator& op, const Point& x0, const LambdaSchedule& schedule,
                                        const IntegratorConfig& config,
                                        const std::optional<FixSetOracle>& oracle = std::nullopt,
                                        double limit_tol = kDefaultLimitTol);

/// K steps of the Krasnoselskii-Mann iteration with lambda_k = lambdas[k].
[[nodiscard]] Trajectory km_iterate(const Operator& op, const Point& x0, const std::vector<double>& lambdas, int K,
                                    const std::optional<FixSetOracle>& oracle = std::nullopt,
                                    double limit_tol = kDefaultLimitTol);
/// Same, with lambda_k = schedule(k).
[[nodiscard]] Trajectory km_iterate(const Operator& op, const Point& x0, const LambdaSchedule& schedule, int K,
                                    const std::optional<FixSetOracle>& oracle = std::nullopt,
                                    double limit_tol = kDefaultLimitTol);

/// Recomputes residual, speed and dist_fix for every sample and refreshes limit_estimate.
/// Oracle failures are rethrown with the sample index.
[[nodiscard]] Trajectory sample_metrics(Trajectory traj, const Operator& op,
                                        const std::optional<FixSetOracle>& oracle = std::nullopt,
                                        double limit_tol = kDefaultLimitTol);

} // namespace regflow
