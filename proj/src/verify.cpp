#include "regflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "regflow/sampling.hpp"

namespace regflow {

bool VerifyReport::passed() const {
    return std::all_of(items.begin(), items.end(), [](const VerifyItem& i) { return i.passed; });
}

std::vector<VerifyItem> VerifyReport::failures() const {
    std::vector<VerifyItem> out;
    std::copy_if(items.begin(), items.end(), std::back_inserter(out), [](const VerifyItem& i) { return !i.passed; });
    return out;
}

Operator expansive_control(Eigen::Index dim) {
    return linear_map(1.5 * Matrix::Identity(dim, dim)).with_label("expansive_control");
}

bool km_euler_identical(const Operator& op, const Point& x0, const LambdaSchedule& schedule, int steps) {
    IntegratorConfig cfg;
    cfg.method = EulerUnit{};
    cfg.t_end = steps;
    const auto flow = integrate_flow(op, x0, schedule, cfg);
    const auto km = km_iterate(op, x0, schedule, steps);
    if (flow.samples.size() != km.samples.size()) return false;
    for (std::size_t k = 0; k < km.samples.size(); ++k) {
        const auto& a = flow.samples[k].x;
        const auto& b = km.samples[k].x;
        if (flow.samples[k].t != static_cast<double>(k) || a.size() != b.size()) return false;
        if (std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) != 0) return false;
    }
    return true;
}

Trajectory dense_rerun(const Scenario& sc) {
    IntegratorConfig cfg;
    cfg.method = RK45Adaptive{1e-10, 1e-13};
    cfg.t_end = std::min(sc.integrator.t_end, kVerifyHorizon);
    cfg.sample_times = uniform_times(kVerifySpacing, cfg.t_end);
    return integrate_flow(sc.op, sc.x0, sc.schedule, cfg, sc.oracle, sc.limit_tol);
}

namespace {

class Collector {
public:
    explicit Collector(VerifyReport& report) : report_(report) {}

    void add(const std::string& group, const std::string& scope, const InequalityReport& r) {
        report_.items.push_back({group, r.name + "[" + scope + "]", r.passed, r.n_points, r.worst_slack, r.tolerance});
    }

    void add(const std::string& group, const std::string& scope, const BoundCheck& b) {
        report_.items.push_back(
            {group, b.bound_name + "[" + scope + "]", b.passed, b.n_points, b.worst_margin, b.tolerance});
    }

    void flag(const std::string& group, const std::string& name, bool ok, int n = 1) {
        report_.items.push_back({group, name, ok, n, 0.0, 0.0});
    }

    void item(VerifyItem i) { report_.items.push_back(std::move(i)); }

private:
    VerifyReport& report_;
};

PrimitiveSet plane(double a, double b, double c) { return PrimitiveSet::hyperplane(make_point({a, b, c}), 0.0); }

std::vector<Point> sweep_points(Eigen::Index dim, const Point& center, double radius, std::uint64_t seed) {
    return BallSampler(center.size() ? center : Point::Zero(dim), radius, seed).draw(500);
}

void closure_sweeps(Collector& out, std::uint64_t seed) {
    const std::string comb = "convex combination of strongly quasinonexpansive operators";
    const std::string comp = "composition of strongly quasinonexpansive operators";
    const Point o2 = Point::Zero(2);
    const Point o3 = Point::Zero(3);

    const auto x_axis = PrimitiveSet::hyperplane(make_point({0, 1}), 0.0);
    const auto y_axis = PrimitiveSet::hyperplane(make_point({1, 0}), 0.0);
    const std::vector<Operator> pair{projector(x_axis), projector(y_axis)};
    const auto origin = FixSetOracle::point(o2);
    const auto pts2 = sweep_points(2, o2, 10.0, seed);
    out.add(comb, "projector pair", check_combination_bound(pair, {0.5, 0.5}, {1, 1}, pts2, origin));
    out.add(comp, "projector pair", check_composition_bound(pair, {1, 1}, pts2, origin));

    const double a = std::acos(-1.0) / 3.0;
    const auto line60 = PrimitiveSet::hyperplane(make_point({-std::sin(a), std::cos(a)}), 0.0);
    const std::vector<Operator> lines{projector(x_axis), projector(line60)};
    out.add(comb, "two lines 60deg", check_combination_bound(lines, {0.3, 0.7}, {1, 1}, pts2, origin));
    out.add(comp, "two lines 60deg", check_composition_bound(lines, {1, 1}, pts2, origin));

    const auto p1 = plane(1, 0, 0);
    const auto p2 = plane(1, 1, 0);
    const auto p3 = plane(1, -2, 0);
    const auto axis = FixSetOracle::intersection({p1, p2, p3});
    const auto pts3 = sweep_points(3, o3, 10.0, seed + 1);
    const std::vector<Operator> triple{projector(p1), projector(p2), projector(p3)};
    out.add(comb, "projector triple", check_combination_bound(triple, {0.2, 0.3, 0.5}, {1, 1, 1}, pts3, axis));
    out.add(comp, "projector triple", check_composition_bound(triple, {1, 1, 1}, pts3, axis));

    const std::vector<Operator> drs{douglas_rachford(p1, p2), douglas_rachford(p2, p3), douglas_rachford(p3, p1)};
    out.add(comb, "DR constituents", check_combination_bound(drs, {0.25, 0.25, 0.5}, {1, 1, 1}, pts3, axis));
    out.add(comp, "DR constituents", check_composition_bound(drs, {1, 1, 1}, pts3, axis));

    const auto b1 = PrimitiveSet::box(make_point({0, 0, 0}), make_point({2, 2, 2}));
    const auto b2 = PrimitiveSet::box(make_point({1, -1, 0.5}), make_point({3, 1, 2.5}));
    const auto b3 = PrimitiveSet::box(make_point({-1, 0, 0}), make_point({1.5, 2, 1}));
    const auto boxes = FixSetOracle::intersection({b1, b2, b3});
    const std::vector<Operator> bops{projector(b1), projector(b2), projector(b3)};
    const auto ptsb = sweep_points(3, make_point({1, 0.5, 1}), 4.0, seed + 2);
    out.add(comb, "three boxes", check_combination_bound(bops, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {1, 1, 1}, ptsb, boxes));
    out.add(comp, "three boxes", check_composition_bound(bops, {1, 1, 1}, ptsb, boxes));
}

void comparison_grid(Collector& out) {
    const std::string group = "Gronwall and Bihari-LaSalle comparison";
    bool all = true;
    int cases = 0;
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const double alpha = 0.5 + 3.5 * i / 4.0;
            const double gamma = 0.2 + 0.6 * j / 4.0;
            for (double u0 : {0.1, 1.0, 10.0}) {
                const auto r = verify_comparison_lemmas(alpha, gamma, u0, kVerifyHorizon);
                for (const auto* rep : {&r.gronwall, &r.gronwall_equality, &r.bihari_lasalle, &r.bihari_closed_form}) {
                    all = all && rep->passed;
                    worst = std::min(worst, rep->worst_slack);
                }
                ++cases;
            }
        }
    }
    out.item({group, "comparison_grid[5x5x3]", all, cases, worst, 1e-8});
    const auto unit = verify_comparison_lemmas(1.0, 0.5, 1.0, 50.0);
    out.add(group, "alpha=1 gamma=0.5 u0=1", unit.bihari_lasalle);
    out.add(group, "alpha=1 gamma=0.5 u0=1", unit.bihari_closed_form);
    const auto sat = verify_comparison_lemmas(2.0, 0.5, 3.0, 10.0);
    out.add(group, "alpha=2 u0=3", sat.gronwall);
    out.add(group, "alpha=2 u0=3", sat.gronwall_equality);
}

void scenario_checks(Collector& out, const Scenario& sc, std::uint64_t seed, std::vector<std::string>& seen_ops) {
    const std::string& name = sc.name;
    if (sc.mode == RunMode::continuous) {
        const auto traj = dense_rerun(sc);
        const Point x_star = sc.oracle.distance(sc.x0).witness;
        out.add("averaged step inequality along the flow", name,
                check_avg_inequality(traj, sc.op, x_star, sc.schedule, 1e-9));
        const auto d = check_descent(traj, sc.op, sc.oracle, x_star, sc.schedule, descent_tolerance(kVerifySpacing));
        out.add("descent along the flow", name, d.distance);
        out.add("descent along the flow", name, d.fejer);
    } else {
        const auto traj = km_iterate(sc.op, sc.x0, sc.schedule, sc.iterations, sc.oracle, sc.limit_tol);
        out.add("averaged step inequality for Krasnoselskii-Mann iterates", name,
                check_avg_inequality(traj, sc.op, sc.oracle.distance(sc.x0).witness, sc.schedule, 1e-9));
    }
    if (sc.schedule.aligned_to_integers()) {
        out.flag("Krasnoselskii-Mann iteration as unit-step Euler", "km_euler_identical[" + name + "]",
                 km_euler_identical(sc.op, sc.x0, sc.schedule, 50), 51);
    }
    const std::string label = sc.op.meta().label;
    if (std::find(seen_ops.begin(), seen_ops.end(), label) != seen_ops.end()) return;
    seen_ops.push_back(label);
    const std::string group = "operator certificates";
    const Operator op = sc.op.with_fix_oracle(sc.oracle);
    out.add(group, name, check_nonexpansive(op, sc.region, 1000, seed));
    if (op.meta().alpha) out.add(group, name, check_averaged(op, sc.region, 1000, seed));
    if (op.meta().rho) out.add(group, name, check_sqne(op, sc.region, 1000, seed));
}

} // namespace

VerifyReport verify_all(const VerifyOptions& options) {
    VerifyReport report;
    Collector out(report);

    const auto core = check_core_identities(10000, options.seed);
    out.add("norm identity for affine combinations", "random triples", core.affine_combination);
    out.add("gradient of the squared distance", "random sets", core.distance_gradient);
    out.add("exponent comparison", "random grid", check_exponent_comparison(1000, options.seed));

    std::vector<std::string> seen_ops;
    for (const auto& file : scenario_files(options.scenario_dir)) {
        scenario_checks(out, load_scenario(file, options.overrides), options.seed, seen_ops);
    }

    closure_sweeps(out, options.seed);
    comparison_grid(out);

    if (options.negative_control) {
        const Operator bad = expansive_control(2);
        out.add("operator certificates", "negative control",
                check_nonexpansive(bad, Region{Point::Zero(2), 10.0}, 1000, options.seed));
    }
    return report;
}

} // namespace regflow
