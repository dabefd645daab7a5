#include "regflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>

#include "regflow/sampling.hpp"
#include "regflow/serialize.hpp"
#include "regflow/trajectory_csv.hpp"

namespace regflow {

using nlohmann::json;

namespace {

class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    [[nodiscard]] const std::string& path() const { return path_; }
    [[nodiscard]] const json& raw() const { return j_; }

    [[noreturn]] void fail(const std::string& message) const { throw ConfigError(path_.empty() ? "<root>" : path_, message); }

    [[nodiscard]] std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[nodiscard]] bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

    [[nodiscard]] Node at(const std::string& key) const {
        require_object();
        if (!j_.contains(key)) throw ConfigError(child_path(key), "missing required field");
        return Node(j_.at(key), child_path(key));
    }

    [[nodiscard]] Node operator[](std::size_t i) const {
        return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]");
    }

    void require_object() const {
        if (!j_.is_object()) fail("expected an object");
    }

    /// Rejects keys outside `allowed`, catching misspelled fields.
    void allow(std::initializer_list<const char*> allowed) const {
        require_object();
        for (const auto& item : j_.items()) {
            const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
            if (!known) throw ConfigError(child_path(item.key()), "unknown field");
        }
    }

    [[nodiscard]] std::size_t array_size() const {
        if (!j_.is_array()) fail("expected an array");
        return j_.size();
    }

    [[nodiscard]] double number() const {
        if (!j_.is_number()) fail("expected a number");
        const double v = j_.get<double>();
        if (!std::isfinite(v)) fail("expected a finite number");
        return v;
    }

    [[nodiscard]] double positive() const {
        const double v = number();
        if (!(v > 0.0)) fail("must be positive");
        return v;
    }

    [[nodiscard]] long long integer() const {
        if (!j_.is_number_integer()) fail("expected an integer");
        return j_.get<long long>();
    }

    [[nodiscard]] std::string text() const {
        if (!j_.is_string()) fail("expected a string");
        return j_.get<std::string>();
    }

    [[nodiscard]] std::vector<double> numbers() const {
        std::vector<double> out(array_size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)[i].number();
        return out;
    }

    [[nodiscard]] Point point(Eigen::Index dim) const {
        const auto v = numbers();
        if (static_cast<Eigen::Index>(v.size()) != dim) {
            fail("expected " + std::to_string(dim) + " entries, got " + std::to_string(v.size()));
        }
        return Eigen::Map<const Point>(v.data(), dim);
    }

    /// Row-major nested arrays.
    [[nodiscard]] Matrix matrix(Eigen::Index rows, Eigen::Index cols) const {
        if (static_cast<Eigen::Index>(array_size()) != rows) fail("expected " + std::to_string(rows) + " rows");
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) m.row(r) = (*this)[static_cast<std::size_t>(r)].point(cols).transpose();
        return m;
    }

private:
    const json& j_;
    std::string path_;
};

template <class F>
auto guarded(const Node& node, F&& build) -> decltype(build()) {
    try {
        return build();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        node.fail(e.what());
    }
}

PrimitiveSet parse_set(const Node& n, Eigen::Index dim) {
    const std::string type = n.at("type").text();
    if (type == "halfspace" || type == "hyperplane") {
        n.allow({"type", "a", "b"});
        const Point a = n.at("a").point(dim);
        const double b = n.at("b").number();
        return guarded(n, [&] {
            return type == "halfspace" ? PrimitiveSet::halfspace(a, b) : PrimitiveSet::hyperplane(a, b);
        });
    }
    if (type == "affine") {
        n.allow({"type", "basis", "offset"});
        const Node basis = n.at("basis");
        const auto k = static_cast<Eigen::Index>(basis.array_size());
        Matrix cols(dim, k);
        for (Eigen::Index i = 0; i < k; ++i) cols.col(i) = basis[static_cast<std::size_t>(i)].point(dim);
        const Point offset = n.at("offset").point(dim);
        return guarded(n, [&] { return PrimitiveSet::affine(cols, offset); });
    }
    if (type == "box") {
        n.allow({"type", "lower", "upper"});
        const Point lo = n.at("lower").point(dim);
        const Point hi = n.at("upper").point(dim);
        return guarded(n, [&] { return PrimitiveSet::box(lo, hi); });
    }
    if (type == "ball") {
        n.allow({"type", "center", "radius"});
        const Point c = n.at("center").point(dim);
        const double r = n.at("radius").number();
        return guarded(n, [&] { return PrimitiveSet::ball(c, r); });
    }
    n.at("type").fail("unknown set type '" + type + "'");
}

std::vector<PrimitiveSet> parse_sets(const Node& n, Eigen::Index dim) {
    std::vector<PrimitiveSet> sets;
    for (std::size_t i = 0; i < n.array_size(); ++i) sets.push_back(parse_set(n[i], dim));
    if (sets.empty()) n.fail("at least one set is required");
    return sets;
}

SimpleFunction parse_function(const Node& n, Eigen::Index dim) {
    const std::string kind = n.at("kind").text();
    if (kind == "indicator") {
        n.allow({"kind", "set"});
        return SimpleFunction::indicator(parse_set(n.at("set"), dim));
    }
    if (kind == "l1") {
        n.allow({"kind", "weight"});
        const double w = n.at("weight").number();
        return guarded(n, [&] { return SimpleFunction::l1(w); });
    }
    if (kind == "quadratic") {
        n.allow({"kind", "Q", "c"});
        const Matrix Q = n.at("Q").matrix(dim, dim);
        const Point c = n.at("c").point(dim);
        return guarded(n, [&] { return SimpleFunction::quadratic(Q, c); });
    }
    n.at("kind").fail("unknown function kind '" + kind + "'");
}

Operator parse_operator(const Node& n, Eigen::Index dim);

std::vector<Operator> parse_children(const Node& children, Eigen::Index dim, bool with_weights) {
    if (with_weights) {
        children.allow({"operators", "weights"});
    } else {
        children.allow({"operators"});
    }
    const Node list = children.at("operators");
    std::vector<Operator> ops;
    for (std::size_t i = 0; i < list.array_size(); ++i) ops.push_back(parse_operator(list[i], dim));
    if (ops.empty()) list.fail("at least one operator is required");
    return ops;
}

Operator parse_operator_body(const Node& n, Eigen::Index dim) {
    const std::string kind = n.at("kind").text();
    if (kind == "identity") {
        n.allow({"kind", "label"});
        return identity(dim);
    }
    if (kind == "zero") {
        n.allow({"kind", "label"});
        return zero_map(dim);
    }
    if (kind == "linear") {
        n.allow({"kind", "label", "matrix"});
        const Matrix M = n.at("matrix").matrix(dim, dim);
        return guarded(n, [&] { return linear_map(M); });
    }
    if (kind == "project" || kind == "reflect") {
        n.allow({"kind", "label", "set"});
        const PrimitiveSet set = parse_set(n.at("set"), dim);
        return kind == "project" ? projector(set) : reflect(set);
    }
    if (kind == "prox") {
        n.allow({"kind", "label", "function", "step"});
        const SimpleFunction fn = parse_function(n.at("function"), dim);
        const Node step = n.at("step");
        const double s = step.number();
        return guarded(step, [&] { return prox_operator(fn, s); });
    }
    if (kind == "forward_backward") {
        n.allow({"kind", "label", "g", "Q", "c", "L", "step"});
        const SimpleFunction g = parse_function(n.at("g"), dim);
        const Matrix Q = n.at("Q").matrix(dim, dim);
        const Point c = n.at("c").point(dim);
        const double L = n.at("L").positive();
        const Node step = n.at("step");
        const double s = step.number();
        if (!(s > 0.0 && s < 2.0 / L)) step.fail("step must lie in (0, 2/L)");
        return guarded(n, [&] { return forward_backward(g, Q, c, L, s); });
    }
    if (kind == "douglas_rachford") {
        n.allow({"kind", "label", "sets"});
        const Node sets = n.at("sets");
        if (sets.array_size() != 2) sets.fail("expected exactly two sets");
        return douglas_rachford(parse_set(sets[0], dim), parse_set(sets[1], dim));
    }
    if (kind == "convex_combination") {
        n.allow({"kind", "label", "children"});
        const Node children = n.at("children");
        const auto ops = parse_children(children, dim, true);
        const Node wnode = children.at("weights");
        const auto weights = wnode.numbers();
        if (weights.size() != ops.size()) wnode.fail("expected one weight per operator");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w > 0.0)) wnode.fail("weights must be positive");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) wnode.fail("weights must sum to 1 (got " + format_double(sum) + ")");
        return guarded(wnode, [&] { return convex_combination(ops, weights); });
    }
    if (kind == "compose") {
        n.allow({"kind", "label", "children"});
        return compose(parse_children(n.at("children"), dim, false));
    }
    if (kind == "relax") {
        n.allow({"kind", "label", "lambda", "child"});
        const Operator child = parse_operator(n.at("child"), dim);
        const Node lam = n.at("lambda");
        const double l = lam.number();
        if (l < 0.0 || l > 1.0) lam.fail("must lie in [0, 1]");
        return relax(child, l);
    }
    n.at("kind").fail("unknown operator kind '" + kind + "'");
}

Operator parse_operator(const Node& n, Eigen::Index dim) {
    Operator op = parse_operator_body(n, dim);
    if (n.has("label")) op = op.with_label(n.at("label").text());
    return op;
}

FixSetOracle parse_oracle(const Node& root, const Operator& op, Eigen::Index dim, const ScenarioOverrides& ov) {
    std::optional<FixSetOracle> oracle;
    if (root.has("fix_oracle")) {
        const Node n = root.at("fix_oracle");
        const std::string kind = n.at("kind").text();
        if (kind == "exact") {
            n.allow({"kind", "set"});
            oracle = FixSetOracle::exact(parse_set(n.at("set"), dim));
        } else if (kind == "point") {
            n.allow({"kind", "point"});
            oracle = FixSetOracle::point(n.at("point").point(dim));
        } else if (kind == "intersection") {
            n.allow({"kind", "sets", "tol", "max_iter"});
            auto sets = parse_sets(n.at("sets"), dim);
            double tol = n.has("tol") ? n.at("tol").positive() : kDefaultFixTol;
            long long iters = n.has("max_iter") ? n.at("max_iter").integer() : kDefaultFixMaxIter;
            if (ov.fix_tol) tol = *ov.fix_tol;
            if (ov.fix_max_iter) iters = *ov.fix_max_iter;
            if (iters < 1) n.fail("max_iter must be at least 1");
            return guarded(n, [&] { return FixSetOracle::intersection(sets, tol, static_cast<int>(iters)); });
        } else {
            n.at("kind").fail("unknown oracle kind '" + kind + "'");
        }
    } else if (op.fix_oracle()) {
        oracle = *op.fix_oracle();
    } else {
        throw ConfigError("fix_oracle", "the operator has no known fixed set; describe one");
    }
    if (ov.fix_tol || ov.fix_max_iter) {
        const double tol = ov.fix_tol.value_or(kDefaultFixTol);
        const int iters = ov.fix_max_iter.value_or(kDefaultFixMaxIter);
        return oracle->with_tolerance(tol, iters);
    }
    return *oracle;
}

LambdaSchedule parse_schedule(const Node& n) {
    const std::string kind = n.at("kind").text();
    if (kind == "constant") {
        n.allow({"kind", "value"});
        const double v = n.at("value").number();
        return guarded(n.at("value"), [&] { return LambdaSchedule::constant(v); });
    }
    if (kind == "piecewise") {
        n.allow({"kind", "breakpoints", "values"});
        auto b = n.at("breakpoints").numbers();
        auto v = n.at("values").numbers();
        return guarded(n, [&] { return LambdaSchedule::piecewise(b, v); });
    }
    if (kind == "sine") {
        n.allow({"kind", "offset", "amplitude", "omega", "phase"});
        const double off = n.at("offset").number();
        const double amp = n.at("amplitude").number();
        const double om = n.at("omega").number();
        const double ph = n.has("phase") ? n.at("phase").number() : 0.0;
        return guarded(n, [&] { return LambdaSchedule::sine(off, amp, om, ph); });
    }
    n.at("kind").fail("unknown schedule kind '" + kind + "'");
}

IntegratorConfig parse_integrator(const Node& n) {
    n.allow({"method", "h", "rel_tol", "abs_tol", "t_end", "samples", "stride"});
    IntegratorConfig cfg;
    cfg.t_end = n.at("t_end").positive();
    const std::string method = n.has("method") ? n.at("method").text() : "rk45";
    if (method == "rk45") {
        RK45Adaptive m;
        if (n.has("rel_tol")) m.rel_tol = n.at("rel_tol").positive();
        if (n.has("abs_tol")) m.abs_tol = n.at("abs_tol").positive();
        cfg.method = m;
    } else if (method == "rk4") {
        cfg.method = RK4Fixed{n.at("h").positive()};
    } else if (method == "euler") {
        cfg.method = EulerFixed{n.at("h").positive()};
    } else if (method == "euler_unit") {
        cfg.method = EulerUnit{};
    } else {
        n.at("method").fail("unknown method '" + method + "'");
    }
    if (n.has("stride")) {
        const long long s = n.at("stride").integer();
        if (s < 1) n.at("stride").fail("must be at least 1");
        cfg.sample_stride = static_cast<int>(s);
    }
    if (n.has("samples")) {
        const Node s = n.at("samples");
        const std::string kind = s.at("kind").text();
        if (kind == "uniform") {
            s.allow({"kind", "dt"});
            cfg.sample_times = uniform_times(s.at("dt").positive(), cfg.t_end);
        } else if (kind == "log") {
            s.allow({"kind", "t_min", "count"});
            const double t_min = s.at("t_min").positive();
            const long long count = s.at("count").integer();
            if (t_min >= cfg.t_end) s.at("t_min").fail("must be below t_end");
            if (count < 2) s.at("count").fail("must be at least 2");
            cfg.sample_times = log_times(t_min, cfg.t_end, static_cast<int>(count));
        } else {
            s.at("kind").fail("unknown sampling kind '" + kind + "'");
        }
    }
    return cfg;
}

Point parse_x0(const Node& n, Eigen::Index dim) {
    if (n.raw().is_array()) return n.point(dim);
    n.allow({"random"});
    const Node r = n.at("random");
    r.allow({"seed", "radius", "center"});
    const long long seed = r.at("seed").integer();
    const double radius = r.at("radius").positive();
    const Point center = r.has("center") ? r.at("center").point(dim) : Point::Zero(dim);
    return BallSampler(center, radius, static_cast<std::uint64_t>(seed)).next();
}

DecayMetric parse_metric(const Node& n) {
    const std::string m = n.text();
    if (m == "residual") return DecayMetric::residual;
    if (m == "dist_fix") return DecayMetric::dist_fix;
    if (m == "dist_to_limit") return DecayMetric::dist_to_limit;
    n.fail("unknown metric '" + m + "'");
}

RegularityMode parse_mode(const Node& n) {
    const std::string m = n.text();
    if (m == "linear") return RegularityMode::linear;
    if (m == "hoelder") return RegularityMode::hoelder;
    n.fail("expected 'linear' or 'hoelder'");
}

double max_spacing(const IntegratorConfig& cfg) {
    if (cfg.sample_times.empty()) return cfg.t_end;
    double prev = 0.0;
    double worst = 0.0;
    for (double t : cfg.sample_times) {
        worst = std::max(worst, t - prev);
        prev = t;
    }
    return worst;
}

} // namespace

Scenario parse_scenario(const json& config, const ScenarioOverrides& overrides) {
    const Node root(config, "");
    root.allow({"schema", "name", "paper_ref", "dimension", "operator", "fix_oracle", "schedule", "mode", "integrator",
                "iterations", "x0", "region", "limit_tol", "analysis", "outputs", "description"});
    if (root.at("schema").integer() != 1) root.at("schema").fail("only schema 1 is supported");
    const std::string name = root.at("name").text();
    if (name.empty() || name.find_first_of("/\\") != std::string::npos) root.at("name").fail("must be a plain file stem");
    const std::string paper_ref = root.has("paper_ref") ? root.at("paper_ref").text() : "";
    const long long dim_ll = root.at("dimension").integer();
    if (dim_ll < 1) root.at("dimension").fail("must be at least 1");
    const auto dim = static_cast<Eigen::Index>(dim_ll);

    if (overrides.fix_tol && !(*overrides.fix_tol > 0.0)) throw ConfigError("--fix-tol", "must be positive");
    if (overrides.fix_max_iter && *overrides.fix_max_iter < 1) throw ConfigError("--fix-max-iter", "must be at least 1");

    const Operator op = parse_operator(root.at("operator"), dim);
    const FixSetOracle oracle = parse_oracle(root, op, dim, overrides);
    const LambdaSchedule schedule =
        root.has("schedule") ? parse_schedule(root.at("schedule")) : LambdaSchedule::constant(1.0);

    const std::string mode_text = root.has("mode") ? root.at("mode").text() : "continuous";
    RunMode mode = RunMode::continuous;
    if (mode_text == "km") {
        mode = RunMode::km;
    } else if (mode_text != "continuous") {
        root.at("mode").fail("expected 'continuous' or 'km'");
    }

    IntegratorConfig integrator;
    int iterations = 0;
    if (mode == RunMode::continuous) {
        integrator = parse_integrator(root.at("integrator"));
        if (std::holds_alternative<EulerUnit>(integrator.method)) {
            if (!schedule.aligned_to_integers()) {
                throw ConfigError("schedule", "euler_unit needs a schedule that is constant on unit intervals");
            }
            if (integrator.t_end != std::floor(integrator.t_end)) {
                throw ConfigError("integrator.t_end", "euler_unit needs an integer horizon");
            }
        }
    } else {
        const long long k = root.at("iterations").integer();
        if (k < 1) root.at("iterations").fail("must be at least 1");
        iterations = static_cast<int>(k);
    }

    const Point x0 = parse_x0(root.at("x0"), dim);
    Region region{Point::Zero(dim), std::max(1.0, x0.norm())};
    if (root.has("region")) {
        const Node r = root.at("region");
        r.allow({"center", "radius"});
        region.center = r.at("center").point(dim);
        region.radius = r.at("radius").positive();
    }
    const double limit_tol = root.has("limit_tol") ? root.at("limit_tol").positive() : kDefaultLimitTol;

    std::optional<RegularityRequest> regularity;
    std::optional<FitRequest> fit;
    CheckRequest checks;
    if (root.has("analysis")) {
        const Node a = root.at("analysis");
        a.allow({"regularity", "fit", "checks", "bound_tol"});
        if (a.has("regularity")) {
            const Node r = a.at("regularity");
            r.allow({"mode", "samples", "seed"});
            RegularityRequest req;
            req.mode = parse_mode(r.at("mode"));
            if (r.has("samples")) {
                const long long s = r.at("samples").integer();
                if (s < 100) r.at("samples").fail("at least 100 samples are required");
                req.samples = static_cast<int>(s);
            }
            if (r.has("seed")) req.seed = static_cast<std::uint64_t>(r.at("seed").integer());
            regularity = req;
        }
        if (a.has("fit")) {
            const Node f = a.at("fit");
            f.allow({"metric", "model", "t_min", "t_max"});
            FitRequest req;
            if (f.has("metric")) req.metric = parse_metric(f.at("metric"));
            const std::string model = f.has("model") ? f.at("model").text() : "auto";
            if (model == "exp") {
                req.model = DecayModel::exponential;
            } else if (model == "pow") {
                req.model = DecayModel::powerlaw;
            } else if (model != "auto") {
                f.at("model").fail("expected 'exp', 'pow' or 'auto'");
            }
            if (f.has("t_min")) req.window.t_min = f.at("t_min").number();
            if (f.has("t_max")) req.window.t_max = f.at("t_max").number();
            fit = req;
        }
        if (a.has("checks")) {
            const Node c = a.at("checks");
            for (std::size_t i = 0; i < c.array_size(); ++i) {
                const std::string name_i = c[i].text();
                if (name_i == "avg_inequality") {
                    checks.avg_inequality = true;
                } else if (name_i == "descent") {
                    checks.descent = true;
                } else if (name_i == "linear_rate_bound") {
                    checks.linear_rate_bound = true;
                } else if (name_i == "hoelder_rate_bound") {
                    checks.hoelder_rate_bound = true;
                } else {
                    c[i].fail("unknown check '" + name_i + "'");
                }
            }
            const bool continuous = mode == RunMode::continuous;
            if (checks.descent && (!continuous || max_spacing(integrator) > kMaxDescentSpacing)) {
                c.fail("descent needs a continuous run sampled at spacing <= 0.1");
            }
            if (checks.linear_rate_bound &&
                (!continuous || !regularity || regularity->mode != RegularityMode::linear)) {
                c.fail("linear_rate_bound needs a continuous run and a linear regularity estimate");
            }
            if (checks.hoelder_rate_bound &&
                (!continuous || !regularity || regularity->mode != RegularityMode::hoelder)) {
                c.fail("hoelder_rate_bound needs a continuous run and a hoelder regularity estimate");
            }
        }
        if (a.has("bound_tol")) checks.bound_tol = a.at("bound_tol").positive();
    }

    OutputRequest outputs;
    if (root.has("outputs")) {
        const Node o = root.at("outputs");
        for (std::size_t i = 0; i < o.array_size(); ++i) {
            const std::string out = o[i].text();
            if (out == "trajectory_csv") {
                outputs.trajectory_csv = true;
            } else if (out == "ratefit_json") {
                outputs.ratefit_json = true;
            } else if (out == "regularity_json") {
                outputs.regularity_json = true;
            } else if (out == "report_json") {
                outputs.report_json = true;
            } else {
                o[i].fail("unknown output '" + out + "'");
            }
        }
        if (outputs.ratefit_json && !fit) o.fail("ratefit_json needs analysis.fit");
        if (outputs.regularity_json && !regularity) o.fail("regularity_json needs analysis.regularity");
    }

    return Scenario{.name = name,
                    .paper_ref = paper_ref,
                    .dimension = dim,
                    .op = op,
                    .oracle = oracle,
                    .schedule = schedule,
                    .mode = mode,
                    .integrator = integrator,
                    .iterations = iterations,
                    .x0 = x0,
                    .region = region,
                    .limit_tol = limit_tol,
                    .regularity = regularity,
                    .fit = fit,
                    .checks = checks,
                    .outputs = outputs};
}

Scenario load_scenario(const std::filesystem::path& file, const ScenarioOverrides& overrides) {
    std::ifstream in(file);
    if (!in) throw ConfigError(file.string(), "cannot open file");
    json config;
    try {
        config = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(file.string(), std::string("invalid JSON: ") + e.what());
    }
    return parse_scenario(config, overrides);
}

std::vector<std::filesystem::path> scenario_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

bool ScenarioResult::passed() const {
    if (numeric_error) return false;
    const bool ineq = std::all_of(inequalities.begin(), inequalities.end(), [](const auto& r) { return r.passed; });
    const bool bnd = std::all_of(bounds.begin(), bounds.end(), [](const auto& b) { return b.passed; });
    return ineq && bnd;
}

ScenarioResult run_scenario(const Scenario& sc) {
    ScenarioResult res;
    try {
        if (sc.mode == RunMode::continuous) {
            res.trajectory = integrate_flow(sc.op, sc.x0, sc.schedule, sc.integrator, sc.oracle, sc.limit_tol);
        } else {
            res.trajectory = km_iterate(sc.op, sc.x0, sc.schedule, sc.iterations, sc.oracle, sc.limit_tol);
        }
    } catch (const IntegrationError& e) {
        res.trajectory = e.partial();
        res.numeric_error = e.what();
        return res;
    } catch (const NumericError& e) {
        res.numeric_error = e.what();
        return res;
    }

    try {
        if (sc.regularity) {
            res.regularity = estimate_operator_regularity(sc.op, sc.oracle, sc.region, sc.regularity->samples,
                                                          sc.regularity->mode, sc.regularity->seed);
        }
        if (sc.fit) {
            if (sc.fit->model) {
                res.fit = fit_decay(res.trajectory, sc.fit->metric, *sc.fit->model, sc.fit->window);
            } else {
                res.selection = select_model(res.trajectory, sc.fit->metric, sc.fit->window);
                res.fit = res.selection->chosen == DecayModel::exponential ? res.selection->exponential
                                                                          : res.selection->powerlaw;
            }
        }
        const auto projection = sc.oracle.distance(sc.x0);
        if (sc.checks.avg_inequality) {
            res.inequalities.push_back(
                check_avg_inequality(res.trajectory, sc.op, projection.witness, sc.schedule, 1e-9));
        }
        if (sc.checks.descent) {
            const auto d = check_descent(res.trajectory, sc.op, sc.oracle, projection.witness, sc.schedule,
                                         descent_tolerance(max_spacing(sc.integrator)));
            res.inequalities.push_back(d.distance);
            res.inequalities.push_back(d.fejer);
        }
        if (sc.checks.linear_rate_bound) {
            for (const auto& b : check_linear_rate_bound(res.trajectory, res.regularity->kappa, sc.schedule,
                                                         projection.distance, sc.checks.bound_tol)) {
                res.bounds.push_back(b);
            }
        }
        if (sc.checks.hoelder_rate_bound) {
            res.hoelder = check_hoelder_rate_bound(res.trajectory, res.regularity->kappa, res.regularity->gamma,
                                                   sc.schedule, sc.checks.bound_tol);
            for (const auto& b : res.hoelder->checks) res.bounds.push_back(b);
        }
    } catch (const NumericError& e) {
        res.numeric_error = e.what();
    }
    return res;
}

std::vector<std::filesystem::path> write_artifacts(const Scenario& sc, const ScenarioResult& res,
                                                   const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    auto write_json = [&](const std::string& suffix, const json& j) {
        const auto file = out_dir / (sc.name + suffix);
        std::ofstream out(file, std::ios::binary);
        if (!out) throw UsageError("cannot write " + file.string());
        out << j.dump(2) << '\n';
        written.push_back(file);
    };
    if (sc.outputs.trajectory_csv) {
        const auto file = out_dir / (sc.name + ".trajectory.csv");
        write_trajectory_csv(file, res.trajectory);
        written.push_back(file);
    }
    if (sc.outputs.ratefit_json && res.fit) {
        json j = {{"metric", to_string(sc.fit->metric)}, {"fit", *res.fit}};
        if (res.selection) j["selection"] = *res.selection;
        write_json(".ratefit.json", j);
    }
    if (sc.outputs.regularity_json && res.regularity) write_json(".regularity.json", *res.regularity);
    if (sc.outputs.report_json) {
        json j = {{"schema", 1},
                  {"name", sc.name},
                  {"paper_ref", sc.paper_ref},
                  {"mode", sc.mode == RunMode::continuous ? "continuous" : "km"},
                  {"passed", res.passed()},
                  {"partial", res.numeric_error.has_value()},
                  {"n_samples", res.trajectory.samples.size()},
                  {"inequalities", res.inequalities},
                  {"bounds", res.bounds}};
        if (res.numeric_error) j["numeric_error"] = *res.numeric_error;
        if (!res.trajectory.samples.empty()) {
            const auto& last = res.trajectory.samples.back();
            j["final"] = {{"t", last.t}, {"x", point_json(last.x)}, {"residual", last.residual}};
        }
        if (res.trajectory.limit_estimate) j["limit_estimate"] = point_json(*res.trajectory.limit_estimate);
        if (res.regularity) j["regularity"] = *res.regularity;
        if (res.fit) j["fit"] = *res.fit;
        if (res.selection) j["selected_model"] = to_string(res.selection->chosen);
        if (res.hoelder) j["hoelder_bound"] = {{"M0", res.hoelder->M0}, {"exponent", res.hoelder->exponent}};
        write_json(".report.json", j);
    }
    return written;
}

} // namespace regflow
