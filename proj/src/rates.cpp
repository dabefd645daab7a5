#include "regflow/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regflow/least_squares.hpp"
#include "regflow/ode.hpp"

namespace regflow {

namespace {

struct Series {
    std::vector<double> t;
    std::vector<double> y;
    bool all_zero = false;
};

Series collect(const Trajectory& traj, DecayMetric metric, const FitWindow& window, bool require_t_ge_one) {
    Series s;
    const bool default_window = !window.t_min && !window.t_max;
    std::vector<std::size_t> idx;
    bool any_in_window = false;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const double t = traj.samples[i].t;
        if (window.t_min && t < *window.t_min) continue;
        if (window.t_max && t > *window.t_max) continue;
        if (require_t_ge_one && t < 1.0) continue;
        any_in_window = true;
        const double v = metric_value(traj, i, metric);
        if (default_window ? v > kFitFloor : v > 0.0) idx.push_back(i);
    }
    if (idx.empty()) {
        s.all_zero = any_in_window;
        return s;
    }
    std::size_t start = 0;
    if (default_window) start = idx.size() / 5;
    for (std::size_t k = start; k < idx.size(); ++k) {
        s.t.push_back(traj.samples[idx[k]].t);
        s.y.push_back(metric_value(traj, idx[k], metric));
    }
    return s;
}

RateFit fit_series(const Series& s, DecayModel model) {
    RateFit fit;
    fit.model = model;
    if (s.t.empty() && s.all_zero) {
        fit.already_converged = true;
        return fit;
    }
    if (static_cast<int>(s.t.size()) < kMinFitPoints) {
        throw FitError("fit_decay: only " + std::to_string(s.t.size()) + " positive samples in the window (need " +
                       std::to_string(kMinFitPoints) + ")");
    }
    std::vector<double> x(s.t.size()), y(s.t.size());
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        x[i] = model == DecayModel::exponential ? s.t[i] : std::log(s.t[i]);
        y[i] = std::log(s.y[i]);
    }
    const auto line = fit_line(x, y);
    fit.rate = -line.slope;
    fit.M = std::exp(line.intercept);
    fit.rss = line.rss;
    fit.n_points = static_cast<int>(s.t.size());
    fit.t_min = s.t.front();
    fit.t_max = s.t.back();
    if (!(fit.rate > 0.0)) throw FitError("fit_decay: metric does not decay over the window");
    if (!std::isfinite(fit.rss) || !std::isfinite(fit.M)) throw FitError("fit_decay: non-finite fit");
    return fit;
}

BoundCheck make_check(std::string name, double tol) {
    BoundCheck c;
    c.bound_name = std::move(name);
    c.tolerance = tol;
    c.worst_margin = std::numeric_limits<double>::infinity();
    return c;
}

void add_margin(BoundCheck& c, double margin) {
    ++c.n_points;
    if (std::isnan(margin)) margin = -std::numeric_limits<double>::infinity();
    c.worst_margin = std::min(c.worst_margin, margin);
}

void close(BoundCheck& c) {
    if (c.n_points == 0) c.worst_margin = 0.0;
    c.passed = c.worst_margin >= -c.tolerance;
}

void require_rate_inputs(const Trajectory& traj, const LambdaSchedule& schedule, const char* what) {
    if (!traj.limit_estimate) {
        throw UsageError(std::string(what) + ": trajectory has no limit estimate; run longer or loosen the residual threshold");
    }
    for (const auto& s : traj.samples) {
        if (!s.dist_fix) throw UsageError(std::string(what) + ": trajectory samples lack dist_fix");
    }
    if (!(schedule.inf_value() > 0.0)) throw UsageError(std::string(what) + ": needs inf lambda > 0");
}

} // namespace

double metric_value(const Trajectory& traj, std::size_t i, DecayMetric metric) {
    const auto& s = traj.samples.at(i);
    switch (metric) {
        case DecayMetric::residual: return s.residual;
        case DecayMetric::dist_fix:
            if (!s.dist_fix) throw UsageError("metric dist_fix: trajectory samples lack dist_fix");
            return *s.dist_fix;
        case DecayMetric::dist_to_limit:
            if (!traj.limit_estimate) throw UsageError("metric dist_to_limit: trajectory has no limit estimate");
            return (s.x - *traj.limit_estimate).norm();
    }
    return 0.0;
}

RateFit fit_decay(const Trajectory& traj, DecayMetric metric, DecayModel model, const FitWindow& window) {
    if (model == DecayModel::powerlaw && window.t_min && !(*window.t_min > 0.0)) {
        throw UsageError("fit_decay: powerlaw needs t_min > 0");
    }
    return fit_series(collect(traj, metric, window, model == DecayModel::powerlaw), model);
}

ModelSelection select_model(const Trajectory& traj, DecayMetric metric, const FitWindow& window) {
    const auto series = collect(traj, metric, window, true);
    ModelSelection sel;
    sel.exponential = fit_series(series, DecayModel::exponential);
    sel.powerlaw = fit_series(series, DecayModel::powerlaw);
    const double n = std::max(1, sel.exponential.n_points);
    sel.chosen = (sel.powerlaw.rss / n < sel.exponential.rss / n) ? DecayModel::powerlaw : DecayModel::exponential;
    return sel;
}

std::array<BoundCheck, 3> check_linear_rate_bound(const Trajectory& traj, double kappa, const LambdaSchedule& schedule,
                                                 double d0, double tol) {
    require_rate_inputs(traj, schedule, "check_linear_rate_bound");
    if (!(kappa > 0.0)) throw UsageError("check_linear_rate_bound: kappa must be positive");
    if (!(d0 >= 0.0)) throw UsageError("check_linear_rate_bound: d0 must be nonnegative");
    const double lam = schedule.inf_value();
    const Point& xbar = *traj.limit_estimate;

    std::array<BoundCheck, 3> out{make_check("squared_distance_decay", tol), make_check("limit_within_twice_distance", tol),
                                  make_check("exponential_rate", tol)};
    for (const auto& s : traj.samples) {
        const double d = *s.dist_fix;
        const double to_limit = (s.x - xbar).norm();
        add_margin(out[0], std::exp(-(lam / (kappa * kappa)) * s.t) * d0 * d0 - d * d);
        add_margin(out[1], 2.0 * d - to_limit);
        add_margin(out[2], 2.0 * std::exp(-(lam / (2.0 * kappa * kappa)) * s.t) * d0 - to_limit);
    }
    for (auto& c : out) close(c);
    return out;
}

double hoelder_rate_exponent(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("hoelder_rate_exponent: gamma must lie in (0, 1)");
    return gamma / (2.0 * (1.0 - gamma));
}

double bihari_constant(double alpha, double gamma) {
    if (!(alpha > 0.0)) throw UsageError("bihari_constant: alpha must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("bihari_constant: gamma must lie in (0, 1)");
    return std::pow(gamma / (alpha * (1.0 - gamma)), gamma / (1.0 - gamma));
}

HoelderBoundResult check_hoelder_rate_bound(const Trajectory& traj, double kappa, double gamma,
                                            const LambdaSchedule& schedule, double tol, double t_min) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("check_hoelder_rate_bound: gamma must lie in (0, 1)");
    if (!(kappa > 0.0)) throw UsageError("check_hoelder_rate_bound: kappa must be positive");
    if (!(t_min > 0.0)) throw UsageError("check_hoelder_rate_bound: t_min must be positive");
    require_rate_inputs(traj, schedule, "check_hoelder_rate_bound");

    HoelderBoundResult res;
    const double alpha = schedule.inf_value() / std::pow(kappa, 2.0 / gamma);
    res.M0 = std::sqrt(bihari_constant(alpha, gamma));
    res.exponent = hoelder_rate_exponent(gamma);
    res.checks = {make_check("hoelder_distance_rate", tol), make_check("hoelder_limit_rate", tol)};
    const Point& xbar = *traj.limit_estimate;
    for (const auto& s : traj.samples) {
        if (s.t < t_min) continue;
        const double bound = res.M0 * std::pow(s.t, -res.exponent);
        add_margin(res.checks[0], bound - *s.dist_fix);
        add_margin(res.checks[1], 2.0 * bound - (s.x - xbar).norm());
    }
    for (auto& c : res.checks) close(c);
    return res;
}

ComparisonReports verify_comparison_lemmas(double alpha, double gamma, double u0, double t_end) {
    if (!(alpha > 0.0)) throw UsageError("verify_comparison_lemmas: alpha must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("verify_comparison_lemmas: gamma must lie in (0, 1)");
    if (!(u0 >= 0.0)) throw UsageError("verify_comparison_lemmas: u0 must be nonnegative");
    if (!(t_end > 0.0)) throw UsageError("verify_comparison_lemmas: t_end must be positive");

    const double tol = 1e-9 * std::max(1.0, u0);
    const auto times = uniform_times(t_end / 200.0, t_end);
    ode::AdaptiveOptions opts;
    opts.rel_tol = 1e-12;
    opts.abs_tol = 1e-16;

    ComparisonReports out{
        InequalityReport{}, InequalityReport{}, InequalityReport{}, InequalityReport{}};
    SlackAccumulator gron("gronwall", tol), gron_eq("gronwall_equality", tol), bihari("bihari_lasalle", tol),
        bihari_cf("bihari_closed_form", tol);

    const ode::Rhs linear = [alpha](double, const Point& u) -> Point { return -alpha * u; };
    const double p = 1.0 / gamma;
    const ode::Rhs power = [alpha, p](double, const Point& u) -> Point {
        Point du(1);
        du[0] = -alpha * std::pow(std::max(u[0], 0.0), p);
        return du;
    };

    Point start(1);
    start[0] = u0;
    ode::AdaptiveStats stats;
    if (u0 == 0.0) {
        for (double t : times) {
            gron.add(0.0);
            gron_eq.add(0.0);
            bihari.add(bihari_constant(alpha, gamma) * std::pow(t, -gamma / (1.0 - gamma)));
            bihari_cf.add(0.0);
        }
    } else {
        (void)ode::dormand_prince(
            linear, 0.0, start, times, opts,
            [&](double t, const Point& u) {
                const double bound = std::exp(-alpha * t) * u0;
                gron.add(bound - u[0]);
                gron_eq.add(-std::abs(bound - u[0]));
            },
            stats);
        const double M = bihari_constant(alpha, gamma);
        const double q = 1.0 - 1.0 / gamma;
        (void)ode::dormand_prince(
            power, 0.0, start, times, opts,
            [&](double t, const Point& u) {
                const double closed = std::pow(std::pow(u0, q) - q * alpha * t, -gamma / (1.0 - gamma));
                bihari.add(M * std::pow(t, -gamma / (1.0 - gamma)) - u[0]);
                bihari_cf.add(-std::abs(closed - u[0]));
            },
            stats);
    }
    out.gronwall = gron.report();
    out.gronwall_equality = gron_eq.report();
    out.bihari_lasalle = bihari.report();
    out.bihari_closed_form = bihari_cf.report();
    return out;
}

} // namespace regflow
