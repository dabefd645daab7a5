#include "regflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "regflow/ode.hpp"

namespace regflow {

namespace {

void validate_config(const IntegratorConfig& config, const LambdaSchedule& schedule) {
    if (!(config.t_end > 0.0) || !std::isfinite(config.t_end)) throw UsageError("integrate_flow: t_end must be positive");
    if (config.sample_stride < 1) throw UsageError("integrate_flow: sample_stride must be positive");
    double prev = 0.0;
    for (double t : config.sample_times) {
        if (!(t > prev) || t > config.t_end) {
            throw UsageError("integrate_flow: sample_times must be strictly increasing within (0, t_end]");
        }
        prev = t;
    }
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, EulerUnit>) {
                if (!schedule.aligned_to_integers()) {
                    throw UsageError("integrate_flow: EulerUnit needs a schedule constant on integer intervals");
                }
                if (config.t_end != std::floor(config.t_end)) throw UsageError("integrate_flow: EulerUnit needs integer t_end");
                for (double t : config.sample_times) {
                    if (t != std::floor(t)) throw UsageError("integrate_flow: EulerUnit needs integer sample times");
                }
            } else if constexpr (std::is_same_v<M, RK45Adaptive>) {
                if (!(m.rel_tol > 0.0) || !(m.abs_tol > 0.0)) throw UsageError("integrate_flow: tolerances must be positive");
            } else {
                if (!(m.h > 0.0) || !std::isfinite(m.h)) throw UsageError("integrate_flow: step h must be positive");
            }
        },
        config.method);
}

/// Segment boundaries: discontinuities of lambda inside (0, t_end) followed by t_end.
std::vector<double> segment_ends(const LambdaSchedule& schedule, double t_end) {
    std::vector<double> ends;
    for (double b : schedule.discontinuities()) {
        if (b > 0.0 && b < t_end) ends.push_back(b);
    }
    ends.push_back(t_end);
    return ends;
}

TrajectorySample bare_sample(double t, const Point& x) {
    TrajectorySample s;
    s.t = t;
    s.x = x;
    return s;
}

} // namespace

std::vector<double> uniform_times(double dt, double t_end) {
    if (!(dt > 0.0) || !(t_end > 0.0)) throw UsageError("uniform_times: dt and t_end must be positive");
    std::vector<double> times;
    for (long k = 1;; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (t >= t_end - 1e-12 * t_end) break;
        times.push_back(t);
    }
    times.push_back(t_end);
    return times;
}

std::vector<double> log_times(double t_min, double t_end, int count) {
    if (!(t_min > 0.0) || !(t_end > t_min) || count < 2) throw UsageError("log_times: need 0 < t_min < t_end, count >= 2");
    std::vector<double> times;
    const double a = std::log(t_min);
    const double b = std::log(t_end);
    for (int i = 0; i < count - 1; ++i) times.push_back(std::exp(a + (b - a) * i / (count - 1)));
    times.push_back(t_end);
    return times;
}

Point km_step(const Point& x, double lam, const Point& tx) { return (1.0 - lam) * x + lam * tx; }

Trajectory integrate_flow(const Operator& op, const Point& x0, const LambdaSchedule& schedule,
                          const IntegratorConfig& config, const std::optional<FixSetOracle>& oracle, double limit_tol) {
    require_dim(x0, op.dim(), "integrate_flow");
    if (!x0.allFinite()) throw UsageError("integrate_flow: non-finite initial point");
    validate_config(config, schedule);

    Trajectory traj;
    traj.mode = TrajectoryMode::continuous;
    traj.schedule = schedule;
    traj.samples.push_back(bare_sample(0.0, x0));

    const auto ends = segment_ends(schedule, config.t_end);
    const bool explicit_times = !config.sample_times.empty();

    // Output stops within (seg_start, seg_end]. With explicit times, segment ends that are not
    // sample times are integration stops but are not recorded.
    auto stops_for = [&](double seg_start, double seg_end) {
        std::vector<double> stops;
        if (explicit_times) {
            for (double t : config.sample_times) {
                if (t > seg_start && t < seg_end) stops.push_back(t);
            }
        }
        stops.push_back(seg_end);
        return stops;
    };
    auto is_recorded = [&](double t) {
        if (!explicit_times) return true;
        return std::binary_search(config.sample_times.begin(), config.sample_times.end(), t);
    };

    Point x = x0;
    double seg_start = 0.0;
    long step_count = 0;

    auto finish = [&](Trajectory t) { return sample_metrics(std::move(t), op, oracle, limit_tol); };

    try {
        for (double seg_end : ends) {
            // lambda is constant on [seg_start, seg_end) for piecewise schedules; the right-hand side
            // must not see the jump at seg_end.
            const double seg_lambda = schedule(seg_start);
            const bool frozen = schedule.is_piecewise_constant();
            const ode::Rhs rhs = [&](double t, const Point& y) -> Point {
                const double lam = frozen ? seg_lambda : schedule(t);
                return lam * (op(y) - y);
            };
            const auto stops = stops_for(seg_start, seg_end);

            if (const auto* adaptive = std::get_if<RK45Adaptive>(&config.method)) {
                ode::AdaptiveOptions opts;
                opts.rel_tol = adaptive->rel_tol;
                opts.abs_tol = adaptive->abs_tol;
                ode::AdaptiveStats stats;
                x = ode::dormand_prince(
                    rhs, seg_start, x, stops, opts,
                    [&](double t, const Point& y) {
                        if (is_recorded(t)) traj.samples.push_back(bare_sample(t, y));
                    },
                    stats);
                traj.achieved_error = std::max(traj.achieved_error.value_or(0.0), stats.max_local_error);
                if (!explicit_times && traj.samples.back().t != seg_end) traj.samples.push_back(bare_sample(seg_end, x));
            } else {
                double h = 0.0;
                if (std::holds_alternative<EulerUnit>(config.method)) h = 1.0;
                else if (const auto* e = std::get_if<EulerFixed>(&config.method)) h = e->h;
                else h = std::get<RK4Fixed>(config.method).h;

                double stop_start = seg_start;
                for (double stop : stops) {
                    const double span = stop - stop_start;
                    const auto n_steps = std::max<long>(1, static_cast<long>(std::ceil(span / h - 1e-9)));
                    for (long k = 0; k < n_steps; ++k) {
                        const double t = stop_start + static_cast<double>(k) * h;
                        const double t_next = (k + 1 == n_steps) ? stop : stop_start + static_cast<double>(k + 1) * h;
                        const double step = t_next - t;
                        if (std::holds_alternative<EulerUnit>(config.method)) {
                            x = km_step(x, frozen ? seg_lambda : schedule(t), op(x));
                        } else if (std::holds_alternative<EulerFixed>(config.method)) {
                            x = ode::euler_step(rhs, t, x, step);
                        } else {
                            x = ode::rk4_step(rhs, t, x, step);
                        }
                        if (!x.allFinite()) throw NumericError("integrate_flow: state became non-finite");
                        ++step_count;
                        const bool at_stop = (k + 1 == n_steps);
                        if (explicit_times) {
                            if (at_stop && is_recorded(stop)) traj.samples.push_back(bare_sample(stop, x));
                        } else if (step_count % config.sample_stride == 0 || (at_stop && stop == config.t_end)) {
                            traj.samples.push_back(bare_sample(t_next, x));
                        }
                    }
                    stop_start = stop;
                }
            }
            seg_start = seg_end;
        }
    } catch (const ode::StepSizeUnderflow& e) {
        throw IntegrationError(e.what(), finish(std::move(traj)));
    } catch (const IntegrationError&) {
        throw;
    } catch (const NumericError& e) {
        throw IntegrationError(e.what(), finish(std::move(traj)));
    }
    return finish(std::move(traj));
}

Trajectory km_iterate(const Operator& op, const Point& x0, const std::vector<double>& lambdas, int K,
                      const std::optional<FixSetOracle>& oracle, double limit_tol) {
    if (K < 1) throw UsageError("km_iterate: K must be at least 1");
    if (lambdas.size() < static_cast<std::size_t>(K)) throw UsageError("km_iterate: fewer than K relaxation values");
    require_dim(x0, op.dim(), "km_iterate");

    std::vector<double> used(lambdas.begin(), lambdas.begin() + K);
    std::vector<double> breaks;
    for (int k = 1; k < K; ++k) breaks.push_back(static_cast<double>(k));
    Trajectory traj;
    traj.mode = TrajectoryMode::discrete;
    // Throws ConstructionError on values outside [0, 1].
    try {
        traj.schedule = LambdaSchedule::piecewise(std::move(breaks), used);
    } catch (const ConstructionError& e) {
        throw UsageError(std::string("km_iterate: ") + e.what());
    }

    Point x = x0;
    traj.samples.push_back(bare_sample(0.0, x));
    for (int k = 0; k < K; ++k) {
        x = km_step(x, used[static_cast<std::size_t>(k)], op(x));
        traj.samples.push_back(bare_sample(static_cast<double>(k + 1), x));
    }
    return sample_metrics(std::move(traj), op, oracle, limit_tol);
}

Trajectory km_iterate(const Operator& op, const Point& x0, const LambdaSchedule& schedule, int K,
                      const std::optional<FixSetOracle>& oracle, double limit_tol) {
    if (K < 1) throw UsageError("km_iterate: K must be at least 1");
    std::vector<double> lambdas;
    lambdas.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) lambdas.push_back(schedule(static_cast<double>(k)));
    auto traj = km_iterate(op, x0, lambdas, K, oracle, limit_tol);
    if (schedule.aligned_to_integers()) traj.schedule = schedule;
    return traj;
}

Trajectory sample_metrics(Trajectory traj, const Operator& op, const std::optional<FixSetOracle>& oracle,
                          double limit_tol) {
    if (traj.samples.empty()) throw UsageError("sample_metrics: empty trajectory");
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        auto& s = traj.samples[i];
        s.residual = residual(op, s.x);
        s.speed = traj.schedule(s.t) * s.residual;
        if (oracle) {
            try {
                s.dist_fix = oracle->distance(s.x).distance;
            } catch (const ConvergenceError& e) {
                throw ConvergenceError("sample " + std::to_string(i) + ": " + e.what(), e.best());
            }
        } else {
            s.dist_fix.reset();
        }
    }
    const auto& last = traj.samples.back();
    if (last.residual < limit_tol) traj.limit_estimate = last.x;
    else traj.limit_estimate.reset();
    return traj;
}

} // namespace regflow
