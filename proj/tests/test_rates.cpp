#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "regflow/rates.hpp"

using namespace regflow;

namespace {

const auto x_axis = PrimitiveSet::hyperplane(make_point({0, 1}), 0.0);

PrimitiveSet line_at(double degrees) {
    const double a = degrees * std::numbers::pi / 180.0;
    return PrimitiveSet::hyperplane(make_point({-std::sin(a), std::cos(a)}), 0.0);
}

template <class F>
Trajectory synthetic(const std::vector<double>& times, F f) {
    Trajectory traj;
    for (double t : times) {
        const double v = f(t);
        traj.samples.push_back(TrajectorySample{t, make_point({v}), v, v, v});
    }
    return traj;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
    return out;
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

} // namespace

TEST_CASE("fit_decay recovers exact synthetic models") {
    const auto expo = synthetic(linspace(0, 5, 50), [](double t) { return 2.0 * std::exp(-3.0 * t); });
    const auto fe = fit_decay(expo, DecayMetric::residual, DecayModel::exponential, {0.0, 5.0});
    CHECK(rel_close(fe.M, 2.0, 1e-10));
    CHECK(rel_close(fe.rate, 3.0, 1e-10));
    CHECK(fe.n_points == 50);
    CHECK(fe.rss < 1e-20);

    const auto power = synthetic(linspace(1, 100, 50), [](double t) { return 5.0 * std::pow(t, -1.5); });
    const auto fp = fit_decay(power, DecayMetric::dist_fix, DecayModel::powerlaw, {1.0, 100.0});
    CHECK(rel_close(fp.M, 5.0, 1e-10));
    CHECK(rel_close(fp.rate, 1.5, 1e-10));
    CHECK(fp.t_min == 1.0);
    CHECK(fp.t_max == 100.0);
}

TEST_CASE("fit_decay under multiplicative noise") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto expo = synthetic(linspace(0, 5, 200), [&](double t) { return 2.0 * std::exp(-3.0 * t) * (1 + 1e-3 * u(rng)); });
    const auto fe = fit_decay(expo, DecayMetric::residual, DecayModel::exponential, {0.0, 5.0});
    CHECK(rel_close(fe.M, 2.0, 0.02));
    CHECK(rel_close(fe.rate, 3.0, 0.02));
    const auto power = synthetic(linspace(1, 100, 200), [&](double t) { return 5.0 * std::pow(t, -1.5) * (1 + 1e-3 * u(rng)); });
    const auto fp = fit_decay(power, DecayMetric::residual, DecayModel::powerlaw, {1.0, 100.0});
    CHECK(rel_close(fp.M, 5.0, 0.02));
    CHECK(rel_close(fp.rate, 1.5, 0.02));
}

TEST_CASE("fit_decay edge cases") {
    const auto zeros = synthetic(linspace(0, 5, 30), [](double) { return 0.0; });
    const auto done = fit_decay(zeros, DecayMetric::residual, DecayModel::exponential);
    CHECK(done.already_converged);
    CHECK(done.rate == 0.0);

    const auto few = synthetic(linspace(0, 1, 5), [](double t) { return std::exp(-t); });
    CHECK_THROWS_AS(fit_decay(few, DecayMetric::residual, DecayModel::exponential), FitError);

    const auto growing = synthetic(linspace(0, 5, 30), [](double t) { return std::exp(t); });
    CHECK_THROWS_AS(fit_decay(growing, DecayMetric::residual, DecayModel::exponential), FitError);

    const auto early = synthetic(linspace(0, 0.9, 30), [](double t) { return std::exp(-t); });
    CHECK_THROWS_AS(fit_decay(early, DecayMetric::residual, DecayModel::powerlaw), FitError);

    Trajectory no_limit = synthetic(linspace(0, 5, 30), [](double t) { return std::exp(-t); });
    CHECK_THROWS_AS(fit_decay(no_limit, DecayMetric::dist_to_limit, DecayModel::exponential), UsageError);
    no_limit.limit_estimate = make_point({0});
    CHECK(rel_close(fit_decay(no_limit, DecayMetric::dist_to_limit, DecayModel::exponential).rate, 1.0, 1e-10));
}

TEST_CASE("two lines at 60 degrees: KM rate is log 4 per step") {
    const auto T = compose({projector(x_axis), projector(line_at(60))});
    const auto traj = km_iterate(T, make_point({3, 4}), LambdaSchedule::constant(1.0), 20,
                                 FixSetOracle::point(make_point({0, 0})));
    const auto fit = fit_decay(traj, DecayMetric::dist_fix, DecayModel::exponential);
    CHECK(fit.rate == doctest::Approx(std::log(4.0)).epsilon(0.05));
}

TEST_CASE("select_model") {
    const auto times = linspace(1, 60, 80);
    const auto expo = synthetic(times, [](double t) { return 2.0 * std::exp(-0.3 * t); });
    CHECK(select_model(expo, DecayMetric::residual).chosen == DecayModel::exponential);
    const auto power = synthetic(times, [](double t) { return 5.0 * std::pow(t, -1.5); });
    const auto sel = select_model(power, DecayMetric::residual);
    CHECK(sel.chosen == DecayModel::powerlaw);
    CHECK(sel.exponential.n_points == sel.powerlaw.n_points);

    const auto ball = PrimitiveSet::ball(make_point({0, 1}), 1.0);
    const auto T = compose({projector(ball), projector(x_axis)});
    IntegratorConfig cfg;
    cfg.t_end = 1e5;
    cfg.sample_times = log_times(1.0, 1e5, 120);
    const auto traj = integrate_flow(T, make_point({0.8, 0.6}), LambdaSchedule::constant(1.0), cfg,
                                     FixSetOracle::point(make_point({0, 0})));
    CHECK(select_model(traj, DecayMetric::dist_fix).chosen == DecayModel::powerlaw);
}

TEST_CASE("linear rate bound") {
    const auto one = LambdaSchedule::constant(1.0);
    IntegratorConfig cfg;
    cfg.t_end = 40;
    cfg.sample_times = uniform_times(0.25, 40);
    const auto origin = FixSetOracle::point(make_point({0}));

    const auto z = integrate_flow(zero_map(1), make_point({1}), one, cfg, origin);
    const auto zc = check_linear_rate_bound(z, 1.0, one, 1.0, 1e-9);
    for (const auto& c : zc) CHECK(c.passed);
    CHECK(zc[0].bound_name == "squared_distance_decay");
    // interior margin e^{-t} - e^{-2t} is positive; the worst is attained at t = 0 or in the tail
    CHECK(zc[0].worst_margin >= 0.0);

    const auto still = integrate_flow(zero_map(1), make_point({0}), one, cfg, origin);
    for (const auto& c : check_linear_rate_bound(still, 1.0, one, 0.0, 1e-12)) CHECK(c.worst_margin == 0.0);

    const auto T = compose({projector(x_axis), projector(line_at(60))});
    const auto o2 = FixSetOracle::point(make_point({0, 0}));
    const auto est = estimate_operator_regularity(T, o2, Region{make_point({0, 0}), 10}, 2000, RegularityMode::linear, 1);
    const Point x0 = make_point({3, 4});
    const auto traj = integrate_flow(T, x0, one, cfg, o2);
    const auto checks = check_linear_rate_bound(traj, est.kappa, one, x0.norm(), 1e-9);
    for (const auto& c : checks) {
        CHECK(c.passed);
        CHECK(c.worst_margin >= -1e-9);
    }
    // fitted rate dominates the guaranteed rate
    const auto fit = fit_decay(traj, DecayMetric::dist_to_limit, DecayModel::exponential);
    CHECK(fit.rate >= 1.0 / (2 * est.kappa * est.kappa) - 1e-6);

    Trajectory missing = traj;
    missing.limit_estimate.reset();
    CHECK_THROWS_AS(check_linear_rate_bound(missing, est.kappa, one, x0.norm(), 1e-9), UsageError);
}

TEST_CASE("Hoelder rate bound") {
    CHECK(hoelder_rate_exponent(0.5) == doctest::Approx(0.5));
    for (double g : {0.2, 0.35, 0.5, 0.65, 0.8}) CHECK(hoelder_rate_exponent(g) == g / (2 * (1 - g)));
    CHECK(bihari_constant(1.0, 0.5) == doctest::Approx(1.0));
    CHECK(bihari_constant(2.0, 0.5) == doctest::Approx(0.5));

    const auto one = LambdaSchedule::constant(1.0);
    const auto ball = PrimitiveSet::ball(make_point({0, 1}), 1.0);
    const auto T = compose({projector(ball), projector(x_axis)});
    const auto o = FixSetOracle::point(make_point({0, 0}));

    IntegratorConfig cfg;
    cfg.t_end = 1e6;
    cfg.sample_times = log_times(1.0, 1e6, 200);
    const auto traj = integrate_flow(T, make_point({0.8, 0.6}), one, cfg, o);
    REQUIRE(traj.limit_estimate);
    const auto est = estimate_operator_regularity(T, o, Region{make_point({0, 0}), 1.0}, 4000, RegularityMode::hoelder, 7);
    const auto res = check_hoelder_rate_bound(traj, est.kappa, est.gamma, one, 1e-9);
    CHECK(res.exponent == hoelder_rate_exponent(est.gamma));
    for (const auto& c : res.checks) CHECK(c.passed);

    const auto still = integrate_flow(T, make_point({0, 0}), one, cfg, o);
    const auto s = check_hoelder_rate_bound(still, 2.0, 0.5, one, 0.0);
    for (const auto& c : s.checks) CHECK(c.passed);

    CHECK_THROWS_AS(check_hoelder_rate_bound(traj, 1.0, 1.0, one, 1e-9), UsageError);
    CHECK_THROWS_AS(check_hoelder_rate_bound(traj, 1.0, 0.0, one, 1e-9), UsageError);
}

TEST_CASE("comparison lemmas") {
    const auto g = verify_comparison_lemmas(2.0, 0.5, 3.0, 5.0);
    CHECK(g.gronwall.passed);
    CHECK(g.gronwall_equality.passed);
    CHECK(std::abs(g.gronwall.worst_slack) <= 1e-9 * 3.0);

    const auto b = verify_comparison_lemmas(1.0, 0.5, 1.0, 50.0);
    CHECK(b.bihari_lasalle.passed);
    CHECK(b.bihari_closed_form.passed);

    const auto zero = verify_comparison_lemmas(1.0, 0.5, 0.0, 10.0);
    CHECK(zero.gronwall.passed);
    CHECK(zero.bihari_lasalle.passed);
    CHECK(zero.gronwall.worst_slack == 0.0);

    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const double alpha = 0.5 + 3.5 * i / 4;
            const double gamma = 0.2 + 0.6 * j / 4;
            for (double u0 : {0.1, 1.0, 10.0}) {
                const auto r = verify_comparison_lemmas(alpha, gamma, u0, 20.0);
                CHECK(r.gronwall.passed);
                CHECK(r.gronwall_equality.passed);
                CHECK(r.bihari_lasalle.passed);
                CHECK(r.bihari_closed_form.passed);
            }
        }
    }
}
