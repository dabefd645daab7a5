// One line per acceptance criterion; exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "regflow/sampling.hpp"
#include "regflow/scenario.hpp"
#include "regflow/verify.hpp"

using namespace regflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

Scenario bundled(const std::string& name) { return load_scenario(fs::path(REGFLOW_SCENARIO_DIR) / (name + ".json")); }

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome km_euler_equivalence() {
    int count = 0;
    double slowest = 0.0;
    for (const auto& file : scenario_files(REGFLOW_SCENARIO_DIR)) {
        const auto sc = load_scenario(file);
        if (!sc.schedule.is_piecewise_constant() || !sc.schedule.aligned_to_integers()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        const bool same = km_euler_identical(sc.op, sc.x0, sc.schedule, 50);
        slowest = std::max(slowest, seconds_since(t0));
        if (!same) return {false, "iterates differ on " + sc.name};
        ++count;
    }
    return {count >= 4 && slowest < 1.0,
            std::to_string(count) + " scenarios bit-identical at t=0..50, slowest " + num(slowest) + " s"};
}

Outcome norm_identity() {
    const auto rep = check_core_identities(10000, 2024).affine_combination;
    return {rep.passed && rep.n_points == 10000,
            std::to_string(rep.n_points) + " triples, worst relative slack " + num(rep.worst_slack)};
}

Outcome gradient_check() {
    const auto rep = check_core_identities(1000, 2025).distance_gradient;
    return {rep.passed && rep.n_points == 1000,
            std::to_string(rep.n_points) + " pairs, worst relative slack " + num(rep.worst_slack)};
}

Outcome trajectory_inequalities() {
    const double tol = 10.0 * kVerifySpacing;
    double worst = std::numeric_limits<double>::infinity();
    int reports = 0;
    std::string failed;
    for (const auto& file : scenario_files(REGFLOW_SCENARIO_DIR)) {
        const auto sc = load_scenario(file);
        std::vector<InequalityReport> reps;
        const Point x_star = sc.oracle.distance(sc.x0).witness;
        if (sc.mode == RunMode::continuous) {
            const auto traj = dense_rerun(sc);
            reps.push_back(check_avg_inequality(traj, sc.op, x_star, sc.schedule, tol));
            const auto d = check_descent(traj, sc.op, sc.oracle, x_star, sc.schedule, tol);
            reps.push_back(d.distance);
            reps.push_back(d.fejer);
        } else {
            const auto traj = km_iterate(sc.op, sc.x0, sc.schedule, sc.iterations, sc.oracle);
            reps.push_back(check_avg_inequality(traj, sc.op, x_star, sc.schedule, tol));
        }
        for (const auto& r : reps) {
            ++reports;
            worst = std::min(worst, r.worst_slack);
            if (r.worst_slack < -tol) failed += " " + r.name + "[" + sc.name + "]";
        }
    }
    return {failed.empty(), std::to_string(reports) + " reports at dt=0.01, worst slack " + num(worst) +
                                (failed.empty() ? "" : ", failing:" + failed)};
}

Outcome closure_sweeps() {
    std::vector<InequalityReport> reps;
    const auto x_axis = PrimitiveSet::hyperplane(make_point({0, 1}), 0.0);
    const auto y_axis = PrimitiveSet::hyperplane(make_point({1, 0}), 0.0);
    const auto pts2 = BallSampler(Point::Zero(2), 10.0, 31).draw(500);
    const std::vector<Operator> pair{projector(x_axis), projector(y_axis)};
    const auto origin = FixSetOracle::point(Point::Zero(2));
    reps.push_back(check_combination_bound(pair, {0.5, 0.5}, {1, 1}, pts2, origin));
    reps.push_back(check_composition_bound(pair, {1, 1}, pts2, origin));

    const auto p1 = PrimitiveSet::hyperplane(make_point({1, 0, 0}), 0.0);
    const auto p2 = PrimitiveSet::hyperplane(make_point({1, 1, 0}), 0.0);
    const auto p3 = PrimitiveSet::hyperplane(make_point({1, -2, 0}), 0.0);
    const auto axis = FixSetOracle::intersection({p1, p2, p3});
    const auto pts3 = BallSampler(Point::Zero(3), 10.0, 32).draw(500);
    const std::vector<Operator> triple{projector(p1), projector(p2), projector(p3)};
    reps.push_back(check_combination_bound(triple, {0.2, 0.3, 0.5}, {1, 1, 1}, pts3, axis));
    reps.push_back(check_composition_bound(triple, {1, 1, 1}, pts3, axis));

    const std::vector<Operator> drs{douglas_rachford(p1, p2), douglas_rachford(p2, p3), douglas_rachford(p3, p1)};
    reps.push_back(check_combination_bound(drs, {0.25, 0.25, 0.5}, {1, 1, 1}, pts3, axis));
    reps.push_back(check_composition_bound(drs, {1, 1, 1}, pts3, axis));

    double worst = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const auto& r : reps) {
        worst = std::min(worst, r.worst_slack);
        ok = ok && r.n_points == 500 && r.worst_slack >= -1e-10;
    }
    return {ok, std::to_string(reps.size()) + " sweeps of 500 points, worst slack " + num(worst)};
}

Outcome comparison_lemmas() {
    int cases = 0;
    bool ok = true;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            for (double u0 : {0.1, 1.0, 10.0}) {
                const auto r = verify_comparison_lemmas(0.5 + 3.5 * i / 4.0, 0.2 + 0.6 * j / 4.0, u0, 20.0);
                ok = ok && r.gronwall.passed && r.gronwall_equality.passed && r.bihari_lasalle.passed &&
                     r.bihari_closed_form.passed;
                ++cases;
            }
        }
    }
    const auto unit = verify_comparison_lemmas(1.0, 0.5, 1.0, 50.0);
    const double M = bihari_constant(1.0, 0.5);
    const bool closed = unit.bihari_closed_form.passed && unit.bihari_closed_form.tolerance <= 1e-9;
    ok = ok && closed && unit.bihari_lasalle.passed && std::abs(M - 1.0) < 1e-15;
    return {ok, std::to_string(cases) + " grid cases; 1/(1+t) closed form worst " +
                    num(unit.bihari_closed_form.worst_slack) + ", M = " + num(M)};
}

double grid_kappa(const Operator& op, double radius, int n) {
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Point p = make_point({-radius + 2.0 * radius * i / (n - 1), -radius + 2.0 * radius * j / (n - 1)});
            if (p.norm() > radius || p.norm() == 0.0) continue;
            best = std::max(best, p.norm() / (p - op(p)).norm());
        }
    }
    return best;
}

Outcome linear_regime() {
    const auto sc = bundled("two_lines_60deg");
    const auto est = estimate_operator_regularity(sc.op, sc.oracle, Region{Point::Zero(2), 10.0}, 10000,
                                                  RegularityMode::linear, 1);
    const double reference = grid_kappa(sc.op, 10.0, 401);
    const bool a = std::abs(est.kappa - reference) <= 0.05 * reference;

    const auto traj = integrate_flow(sc.op, sc.x0, sc.schedule, sc.integrator, sc.oracle, sc.limit_tol);
    const double d0 = sc.oracle.distance(sc.x0).distance;
    double worst = std::numeric_limits<double>::infinity();
    bool b = true;
    for (const auto& c : check_linear_rate_bound(traj, est.kappa, sc.schedule, d0, 1e-9)) {
        worst = std::min(worst, c.worst_margin);
        b = b && c.worst_margin >= -1e-9;
    }
    const auto fit = fit_decay(traj, DecayMetric::dist_to_limit, DecayModel::exponential);
    const double guaranteed = sc.schedule.inf_value() / (2.0 * est.kappa * est.kappa);
    const bool c = fit.rate >= guaranteed;
    return {a && b && c, "kappa " + num(est.kappa) + " vs grid " + num(reference) + "; worst margin " + num(worst) +
                             "; fitted rate " + num(fit.rate) + " >= " + num(guaranteed)};
}

Outcome hoelder_regime() {
    const auto sc = bundled("tangent_ball_line");
    const auto est = estimate_operator_regularity(sc.op, sc.oracle, Region{Point::Zero(2), 1.0}, 10000,
                                                  RegularityMode::hoelder, 1);
    const bool a = est.gamma >= 0.4 && est.gamma <= 0.6;
    const auto traj = integrate_flow(sc.op, sc.x0, sc.schedule, sc.integrator, sc.oracle, sc.limit_tol);
    const auto sel = select_model(traj, DecayMetric::dist_fix);
    const bool b = sel.chosen == DecayModel::powerlaw;
    const auto bound = check_hoelder_rate_bound(traj, est.kappa, est.gamma, sc.schedule, 1e-6, 1.0);
    double worst = bound.checks[0].worst_margin;
    bool c = true;
    for (const auto& chk : bound.checks) {
        worst = std::min(worst, chk.worst_margin);
        c = c && chk.worst_margin >= -1e-6;
    }
    return {a && b && c, "gamma " + num(est.gamma) + "; chosen " + (b ? std::string("powerlaw") : "exponential") +
                             "; M0 " + num(bound.M0) + ", worst margin " + num(worst)};
}

Outcome discrete_mirror() {
    auto per_point = [](const RateFit& f) { return f.rss / f.n_points; };
    const auto lin = bundled("two_lines_60deg_km");
    const auto lin_traj = km_iterate(lin.op, lin.x0, lin.schedule, lin.iterations, lin.oracle);
    const auto lin_sel = select_model(lin_traj, DecayMetric::dist_fix);
    const auto hol = bundled("tangent_ball_line_km");
    const auto hol_traj = km_iterate(hol.op, hol.x0, hol.schedule, hol.iterations, hol.oracle);
    const auto hol_sel = select_model(hol_traj, DecayMetric::dist_fix);
    const bool ok = per_point(lin_sel.exponential) < per_point(lin_sel.powerlaw) &&
                    per_point(hol_sel.powerlaw) < per_point(hol_sel.exponential);
    return {ok, "polyhedral rss/pt exp " + num(per_point(lin_sel.exponential)) + " vs pow " +
                    num(per_point(lin_sel.powerlaw)) + "; tangent exp " + num(per_point(hol_sel.exponential)) +
                    " vs pow " + num(per_point(hol_sel.powerlaw)) + " (rate " + num(hol_sel.powerlaw.rate) + ")"};
}

Outcome dykstra_oracle() {
    const auto h1 = PrimitiveSet::halfspace(make_point({1, 0}), 0.0);
    const auto h2 = PrimitiveSet::halfspace(make_point({0, 1}), 0.0);
    const auto orth = dykstra_project({h1, h2}, make_point({1, 1}), kDefaultFixTol, kDefaultFixMaxIter);
    const double err = orth.witness.cwiseAbs().maxCoeff();

    std::mt19937_64 rng(77);
    std::normal_distribution<double> g;
    const double tol = 1e-10;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = 4;
        std::vector<PrimitiveSet> planes;
        for (int k = 0; k < 2 + trial % 2; ++k) {
            Point a(dim);
            for (int i = 0; i < dim; ++i) a[i] = g(rng);
            planes.push_back(PrimitiveSet::hyperplane(a, g(rng)));
        }
        Point x(dim);
        for (int i = 0; i < dim; ++i) x[i] = 3.0 * g(rng);
        const auto exact = FixSetOracle::intersection(planes).distance(x);
        const auto iter = dykstra_project(planes, x, tol, kDefaultFixMaxIter);
        worst = std::max(worst, (exact.witness - iter.witness).norm());
    }
    return {err <= 1e-10 && worst <= 10.0 * tol,
            "orthant projection error " + num(err) + "; max deviation from exact solves " + num(worst)};
}

Outcome negative_control() {
    VerifyOptions opts;
    opts.negative_control = true;
    const auto rep = verify_all(opts);
    const auto fails = rep.failures();
    const bool named = fails.size() == 1 && fails[0].name.rfind("nonexpansive[expansive_control]", 0) == 0;
    return {!rep.passed() && named, fails.empty() ? "no failure reported" : "verify fails on " + fails[0].name};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"KM/Euler equivalence", km_euler_equivalence},
        {"norm identity sweep", norm_identity},
        {"squared-distance gradient", gradient_check},
        {"trajectory inequalities", trajectory_inequalities},
        {"combination/composition sweeps", closure_sweeps},
        {"comparison lemmas", comparison_lemmas},
        {"linear regime (two lines)", linear_regime},
        {"Hoelder regime (tangent ball/line)", hoelder_regime},
        {"discrete mirror", discrete_mirror},
        {"Dykstra oracle", dykstra_oracle},
        {"negative control", negative_control},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = seconds_since(t0);
        if (!out.passed) ++failed;
        std::printf("[%s] %2zu %s: %s (%.2f s)\n", out.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    out.detail.c_str(), secs);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
