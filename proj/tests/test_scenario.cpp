#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "regflow/scenario.hpp"
#include "regflow/serialize.hpp"
#include "regflow/trajectory_csv.hpp"
#include "regflow/verify.hpp"

using namespace regflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_config() {
    return json::parse(R"({
      "schema": 1,
      "name": "probe",
      "dimension": 2,
      "operator": {"kind": "project", "set": {"type": "hyperplane", "a": [0, 1], "b": 0}},
      "mode": "continuous",
      "integrator": {"t_end": 2, "samples": {"kind": "uniform", "dt": 0.05}},
      "x0": [1, 2]
    })");
}

std::string config_error_path(const json& config) {
    try {
        (void)parse_scenario(config);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("regflow_test_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("bundled scenarios parse and cover both run modes") {
    const auto files = scenario_files(REGFLOW_SCENARIO_DIR);
    REQUIRE(files.size() == 10);
    int km = 0;
    for (const auto& f : files) {
        const auto sc = load_scenario(f);
        CHECK_FALSE(sc.paper_ref.empty());
        CHECK(sc.name == f.stem().string());
        if (sc.mode == RunMode::km) ++km;
    }
    CHECK(km == 5);
}

TEST_CASE("validation names the offending field") {
    try {
        (void)load_scenario(fs::path(REGFLOW_TEST_DATA) / "bad_weights.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path() == "operator.children.weights");
        CHECK(std::string(e.what()).find("sum to 1") != std::string::npos);
    }

    auto c = base_config();
    c.erase("x0");
    CHECK(config_error_path(c) == "x0");

    c = base_config();
    c["schema"] = 2;
    CHECK(config_error_path(c) == "schema");

    c = base_config();
    c["operator"]["set"]["a"] = {0, 1, 0};
    CHECK(config_error_path(c) == "operator.set.a");

    c = base_config();
    c["operator"]["sett"] = 1;
    CHECK(config_error_path(c) == "operator.sett");

    c = base_config();
    c["operator"] = json::parse(R"({"kind": "forward_backward", "g": {"kind": "l1", "weight": 1},
        "Q": [[1, 0], [0, 1]], "c": [0, 0], "L": 1, "step": 2.5})");
    CHECK(config_error_path(c) == "operator.step");

    c = base_config();
    c["operator"] = json::parse(R"({"kind": "compose", "children": {"operators": [
        {"kind": "project", "set": {"type": "ball", "center": [0, 0], "radius": -1}}]}})");
    CHECK(config_error_path(c) == "operator.children.operators[0].set");

    c = base_config();
    c["fix_oracle"] = json::parse(R"({"kind": "intersection", "sets": [
        {"type": "ball", "center": [0, 0], "radius": 1}, {"type": "ball", "center": [5, 0], "radius": 1}]})");
    CHECK(config_error_path(c) == "fix_oracle");

    c = base_config();
    c["operator"] = json::parse(R"({"kind": "reflect", "set": {"type": "hyperplane", "a": [0, 1], "b": 0}})");
    c["operator"]["kind"] = "identity";
    c["operator"].erase("set");
    CHECK(config_error_path(c) == "fix_oracle");

    c = base_config();
    c["integrator"]["samples"]["dt"] = 0.5;
    c["analysis"] = json::parse(R"({"checks": ["descent"]})");
    CHECK(config_error_path(c) == "analysis.checks");

    c = base_config();
    c["analysis"] = json::parse(R"({"checks": ["hoelder_rate_bound"]})");
    CHECK(config_error_path(c) == "analysis.checks");

    c = base_config();
    c["outputs"] = {"ratefit_json"};
    CHECK(config_error_path(c) == "outputs");

    c = base_config();
    c["integrator"]["method"] = "euler_unit";
    c["schedule"] = json::parse(R"({"kind": "sine", "offset": 0.5, "amplitude": 0.1, "omega": 1})");
    CHECK(config_error_path(c) == "schedule");

    c = base_config();
    c["mode"] = "km";
    CHECK(config_error_path(c) == "iterations");

    ScenarioOverrides ov;
    ov.fix_tol = -1.0;
    CHECK_THROWS_AS(parse_scenario(base_config(), ov), ConfigError);
}

TEST_CASE("defaults and derived fields") {
    auto c = base_config();
    const auto sc = parse_scenario(c);
    CHECK(sc.region.radius == doctest::Approx(std::sqrt(5.0)));
    CHECK(sc.limit_tol == kDefaultLimitTol);
    CHECK(std::holds_alternative<ExactSetOracle>(sc.oracle.variant()));

    c["x0"] = json::parse(R"({"random": {"seed": 4, "radius": 2}})");
    const auto a = parse_scenario(c);
    const auto b = parse_scenario(c);
    CHECK(a.x0 == b.x0);
    CHECK(a.x0.norm() <= 2.0);

    c = base_config();
    c["fix_oracle"] = json::parse(R"({"kind": "intersection", "sets": [{"type": "hyperplane", "a": [0, 1], "b": 0}]})");
    ScenarioOverrides ov;
    ov.fix_tol = 1e-8;
    ov.fix_max_iter = 77;
    const auto with_ov = parse_scenario(c, ov);
    const auto& inter = std::get<IntersectionOracle>(with_ov.oracle.variant());
    CHECK(inter.tol == 1e-8);
    CHECK(inter.max_iter == 77);
}

TEST_CASE("trajectory csv round trip") {
    Trajectory traj;
    traj.samples.push_back({0.0, make_point({0.1, -1.0 / 3.0}), 0.7, std::nullopt, 0.7});
    traj.samples.push_back({0.25, make_point({1e-300, 12345.678901234567}), 1e-17, 2.0 / 3.0, 5e-18});
    std::stringstream ss;
    write_trajectory_csv(ss, traj);
    const std::string text = ss.str();
    CHECK(text.substr(0, text.find('\n')) == "t,x_0,x_1,residual,dist_fix,speed");
    CHECK(text.find("0.10000000000000001") != std::string::npos);
    CHECK(text.find("0.69999999999999996,,0.69999999999999996") != std::string::npos);

    const auto back = read_trajectory_csv(ss);
    REQUIRE(back.samples.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.samples[i].t == traj.samples[i].t);
        CHECK(back.samples[i].x == traj.samples[i].x);
        CHECK(back.samples[i].residual == traj.samples[i].residual);
        CHECK(back.samples[i].dist_fix == traj.samples[i].dist_fix);
        CHECK(back.samples[i].speed == traj.samples[i].speed);
    }

    std::stringstream bad_header("time,x_0,residual,dist_fix,speed\n");
    CHECK_THROWS_AS(read_trajectory_csv(bad_header), UsageError);
    std::stringstream bad_number("t,x_0,residual,dist_fix,speed\n0,abc,1,,1\n");
    CHECK_THROWS_AS(read_trajectory_csv(bad_number), UsageError);
    std::stringstream short_row("t,x_0,residual,dist_fix,speed\n0,1,1\n");
    CHECK_THROWS_AS(read_trajectory_csv(short_row), UsageError);
}

TEST_CASE("artifacts are byte-identical across runs") {
    const auto sc = load_scenario(fs::path(REGFLOW_SCENARIO_DIR) / "two_lines_60deg.json");
    const auto d1 = fresh_dir("a");
    const auto d2 = fresh_dir("b");
    const auto files1 = write_artifacts(sc, run_scenario(sc), d1);
    const auto files2 = write_artifacts(sc, run_scenario(sc), d2);
    REQUIRE(files1.size() == 4);
    for (std::size_t i = 0; i < files1.size(); ++i) {
        CHECK(files1[i].filename() == files2[i].filename());
        CHECK(slurp(files1[i]) == slurp(files2[i]));
    }
    const auto report = json::parse(slurp(d1 / "two_lines_60deg.report.json"));
    CHECK(report["passed"] == true);
    CHECK(report["paper_ref"].get<std::string>().find("linear regularity") != std::string::npos);
    const auto ratefit = json::parse(slurp(d1 / "two_lines_60deg.ratefit.json"));
    CHECK(ratefit["fit"]["model"] == "exponential");
    CHECK(ratefit["selection"]["chosen"] == "exponential");
}

TEST_CASE("bundled scenarios pass their own checks") {
    for (const auto& f : scenario_files(REGFLOW_SCENARIO_DIR)) {
        const auto sc = load_scenario(f);
        const auto res = run_scenario(sc);
        INFO(sc.name);
        CHECK(res.passed());
        CHECK_FALSE(res.numeric_error);
        if (sc.name == "tangent_ball_line" || sc.name == "tangent_ball_line_km") {
            REQUIRE(res.fit);
            CHECK(res.fit->model == DecayModel::powerlaw);
        }
        if (sc.name == "two_lines_60deg" || sc.name == "two_lines_60deg_km") {
            REQUIRE(res.fit);
            CHECK(res.fit->model == DecayModel::exponential);
        }
    }
}

TEST_CASE("numeric failures are reported with partial results") {
    auto c = base_config();
    c["mode"] = "km";
    c.erase("integrator");
    c["iterations"] = 5;
    c["analysis"] = json::parse(R"({"fit": {"metric": "residual", "model": "exp"}})");
    c["outputs"] = {"trajectory_csv", "report_json"};
    c["operator"] = json::parse(R"({"kind": "relax", "lambda": 0.5,
        "child": {"kind": "project", "set": {"type": "hyperplane", "a": [0, 1], "b": 0}}})");
    const auto sc = parse_scenario(c);
    const auto res = run_scenario(sc);
    REQUIRE(res.numeric_error);
    CHECK_FALSE(res.passed());
    CHECK(res.trajectory.samples.size() == 6);
    const auto dir = fresh_dir("partial");
    (void)write_artifacts(sc, res, dir);
    const auto report = json::parse(slurp(dir / "probe.report.json"));
    CHECK(report["partial"] == true);
    CHECK(report.contains("numeric_error"));
}

TEST_CASE("verification verdicts do not depend on the seed") {
    std::vector<std::vector<bool>> verdicts;
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        VerifyOptions opts;
        opts.seed = seed;
        const auto rep = verify_all(opts);
        CHECK(rep.passed());
        std::vector<bool> v;
        for (const auto& i : rep.items) v.push_back(i.passed);
        verdicts.push_back(v);
    }
    for (const auto& v : verdicts) CHECK(v == verdicts.front());

    VerifyOptions neg;
    neg.negative_control = true;
    const auto rep = verify_all(neg);
    CHECK_FALSE(rep.passed());
    const auto fails = rep.failures();
    REQUIRE(fails.size() == 1);
    CHECK(fails[0].name.find("nonexpansive[expansive_control]") == 0);
}
