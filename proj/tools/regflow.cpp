#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "regflow/scenario.hpp"
#include "regflow/serialize.hpp"
#include "regflow/trajectory_csv.hpp"
#include "regflow/verify.hpp"

namespace {

using namespace regflow;

enum Exit : int { kPass = 0, kCheckFailed = 1, kConfigError = 2, kNumericError = 3 };

std::string verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

ScenarioOverrides overrides_from(const std::optional<double>& tol, const std::optional<int>& iters) {
    ScenarioOverrides ov;
    ov.fix_tol = tol;
    ov.fix_max_iter = iters;
    return ov;
}

int run_command(const std::string& config, const ScenarioOverrides& ov, const std::string& out_dir) {
    const Scenario sc = load_scenario(config, ov);
    const ScenarioResult res = run_scenario(sc);
    for (const auto& file : write_artifacts(sc, res, out_dir)) std::cout << "wrote " << file.string() << '\n';

    std::cout << "scenario " << sc.name;
    if (!sc.paper_ref.empty()) std::cout << " (" << sc.paper_ref << ")";
    std::cout << '\n';
    if (!res.trajectory.samples.empty()) {
        const auto& last = res.trajectory.samples.back();
        std::cout << "  samples " << res.trajectory.samples.size() << ", final t " << format_double(last.t)
                  << ", residual " << format_double(last.residual) << '\n';
    }
    if (res.regularity) {
        std::cout << "  regularity " << to_string(res.regularity->mode) << ": kappa "
                  << format_double(res.regularity->kappa) << ", gamma " << format_double(res.regularity->gamma)
                  << '\n';
    }
    if (res.fit) {
        std::cout << "  fit " << to_string(res.fit->model) << ": M " << format_double(res.fit->M) << ", rate "
                  << format_double(res.fit->rate) << '\n';
    }
    for (const auto& r : res.inequalities) {
        std::cout << verdict(r.passed) << ' ' << r.name << " worst_slack " << format_double(r.worst_slack)
                  << " tolerance " << format_double(r.tolerance) << '\n';
    }
    for (const auto& b : res.bounds) {
        std::cout << verdict(b.passed) << ' ' << b.bound_name << " worst_margin " << format_double(b.worst_margin)
                  << " tolerance " << format_double(b.tolerance) << '\n';
    }
    if (res.numeric_error) {
        std::cerr << "numeric error: " << *res.numeric_error << " (partial artifacts written)\n";
        return kNumericError;
    }
    return res.passed() ? kPass : kCheckFailed;
}

int verify_command(const VerifyOptions& options) {
    const VerifyReport report = verify_all(options);
    std::vector<std::string> groups;
    for (const auto& item : report.items) {
        if (std::find(groups.begin(), groups.end(), item.group) == groups.end()) groups.push_back(item.group);
    }
    for (const auto& group : groups) {
        std::cout << group << '\n';
        for (const auto& item : report.items) {
            if (item.group != group) continue;
            std::cout << "  " << verdict(item.passed) << ' ' << item.name << " n=" << item.n_points;
            if (item.tolerance > 0.0 || item.worst != 0.0) {
                std::cout << " worst " << format_double(item.worst) << " tolerance " << format_double(item.tolerance);
            }
            std::cout << '\n';
        }
    }
    const auto failures = report.failures();
    std::cout << report.items.size() - failures.size() << '/' << report.items.size() << " checks passed\n";
    if (failures.empty()) return kPass;
    std::cerr << "failed checks:\n";
    for (const auto& f : failures) std::cerr << "  " << f.name << " worst " << format_double(f.worst) << '\n';
    return kCheckFailed;
}

int rate_command(const std::string& csv, const std::string& model, const std::string& metric_name,
                 const FitWindow& window) {
    const Trajectory traj = read_trajectory_csv(std::filesystem::path(csv));
    DecayMetric metric = DecayMetric::dist_fix;
    if (metric_name == "residual") {
        metric = DecayMetric::residual;
    } else if (metric_name == "dist_to_limit") {
        throw UsageError("dist_to_limit needs a limit estimate, which trajectory files do not carry");
    }
    nlohmann::json out = {{"metric", to_string(metric)}};
    if (model == "auto") {
        const auto sel = select_model(traj, metric, window);
        out["selection"] = sel;
        out["fit"] = sel.chosen == DecayModel::exponential ? sel.exponential : sel.powerlaw;
    } else {
        out["fit"] = fit_decay(traj, metric, model == "exp" ? DecayModel::exponential : DecayModel::powerlaw, window);
    }
    std::cout << out.dump(2) << '\n';
    return kPass;
}

int reg_command(const std::string& config, const ScenarioOverrides& ov, const std::string& mode, int samples,
                std::uint64_t seed, const std::string& out_dir) {
    const Scenario sc = load_scenario(config, ov);
    const auto est = estimate_operator_regularity(
        sc.op, sc.oracle, sc.region, samples, mode == "linear" ? RegularityMode::linear : RegularityMode::hoelder, seed);
    const nlohmann::json j = est;
    std::filesystem::create_directories(out_dir);
    const auto file = std::filesystem::path(out_dir) / (sc.name + ".regularity.json");
    std::ofstream(file, std::ios::binary) << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
    return kPass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relaxed fixed-point flows: simulation, regularity estimates and rate checks"};
    app.require_subcommand(1);

    std::optional<double> fix_tol;
    std::optional<int> fix_max_iter;
    std::string out_dir = "out";
    app.add_option("--fix-tol", fix_tol, "Dykstra stopping tolerance for intersection oracles");
    app.add_option("--fix-max-iter", fix_max_iter, "Dykstra cycle limit for intersection oracles");
    app.add_option("--out-dir", out_dir, "Directory for artifacts")->envname("REGFLOW_OUT_DIR");

    std::string config;
    auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
    run->add_option("config", config, "Scenario JSON file")->required();

    VerifyOptions vopts;
    auto* verify = app.add_subcommand("verify", "Run the verification suite over the bundled corpus");
    verify->add_option("--seed", vopts.seed, "Seed for every sampled check");
    verify->add_flag("--negative-control", vopts.negative_control, "Include the deliberately expansive operator");
    verify->add_option("--scenario-dir", vopts.scenario_dir, "Directory of scenario files");

    std::string csv;
    std::string model = "auto";
    std::string metric = "dist_fix";
    std::optional<double> t_min;
    std::optional<double> t_max;
    auto* rate = app.add_subcommand("rate", "Fit a decay model to a trajectory CSV");
    rate->add_option("trajectory", csv, "Trajectory CSV file")->required();
    rate->add_option("--model", model, "exp, pow or auto")->check(CLI::IsMember({"exp", "pow", "auto"}));
    rate->add_option("--metric", metric, "residual or dist_fix")->check(CLI::IsMember({"residual", "dist_fix"}));
    rate->add_option("--t-min", t_min, "Start of the fit window");
    rate->add_option("--t-max", t_max, "End of the fit window");

    std::string reg_mode = "linear";
    int samples = 2000;
    std::uint64_t seed = 1;
    auto* reg = app.add_subcommand("reg", "Estimate the regularity constants of a scenario operator");
    reg->add_option("config", config, "Scenario JSON file")->required();
    reg->add_option("--mode", reg_mode, "linear or hoelder")->check(CLI::IsMember({"linear", "hoelder"}));
    reg->add_option("--samples", samples, "Number of samples")->check(CLI::Range(100, 100000000));
    reg->add_option("--seed", seed, "Sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfigError;
    }

    try {
        const auto ov = overrides_from(fix_tol, fix_max_iter);
        if (*run) return run_command(config, ov, out_dir);
        if (*verify) {
            vopts.overrides = ov;
            return verify_command(vopts);
        }
        if (*rate) return rate_command(csv, model, metric, FitWindow{t_min, t_max});
        if (*reg) return reg_command(config, ov, reg_mode, samples, seed, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericError;
    }
    return kConfigError;
}
