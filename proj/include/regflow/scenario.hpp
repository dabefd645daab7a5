#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "regflow/rates.hpp"
#include "regflow/regularity.hpp"

namespace regflow {

/// Invalid scenario description. `path()` names the offending field, e.g. "operator.children.weights".
class ConfigError : public UsageError {
public:
    ConfigError(std::string path, const std::string& message)
        : UsageError(path + ": " + message), path_(std::move(path)) {}
    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

enum class RunMode { continuous, km };

struct RegularityRequest {
    RegularityMode mode = RegularityMode::linear;
    int samples = 2000;
    std::uint64_t seed = 1;
};

struct FitRequest {
    DecayMetric metric = DecayMetric::dist_fix;
    /// Empty means: fit both models and keep the better one.
    std::optional<DecayModel> model;
    FitWindow window;
};

struct CheckRequest {
    bool avg_inequality = false;
    bool descent = false;
    bool linear_rate_bound = false;
    bool hoelder_rate_bound = false;
    /// Tolerance for the rate bounds.
    double bound_tol = 1e-9;
};

struct OutputRequest {
    bool trajectory_csv = false;
    bool ratefit_json = false;
    bool regularity_json = false;
    bool report_json = false;
};

struct Scenario {
    std::string name;
    std::string paper_ref;
    Eigen::Index dimension = 0;
    Operator op;
    FixSetOracle oracle;
    LambdaSchedule schedule = LambdaSchedule::constant(1.0);
    RunMode mode = RunMode::continuous;
    IntegratorConfig integrator;
    int iterations = 0;
    Point x0;
    Region region;
    double limit_tol = kDefaultLimitTol;
    std::optional<RegularityRequest> regularity;
    std::optional<FitRequest> fit;
    CheckRequest checks;
    OutputRequest outputs;
};

struct ScenarioOverrides {
    std::optional<double> fix_tol;
    std::optional<int> fix_max_iter;
};

/// Validates the whole description before building anything that computes.
[[nodiscard]] Scenario parse_scenario(const nlohmann::json& config, const ScenarioOverrides& overrides = {});
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& file, const ScenarioOverrides& overrides = {});
/// Every *.json file of a directory, sorted by file name.
[[nodiscard]] std::vector<std::filesystem::path> scenario_files(const std::filesystem::path& dir);

struct ScenarioResult {
    Trajectory trajectory;
    std::optional<RegularityEstimate> regularity;
    std::optional<RateFit> fit;
    std::optional<ModelSelection> selection;
    std::optional<HoelderBoundResult> hoelder;
    std::vector<InequalityReport> inequalities;
    std::vector<BoundCheck> bounds;
    /// Set when a numeric failure stopped the run; the trajectory is then partial.
    std::optional<std::string> numeric_error;

    [[nodiscard]] bool passed() const;
};

/// Runs the flow or iteration, then the requested estimates, fits and checks.
[[nodiscard]] ScenarioResult run_scenario(const Scenario& scenario);

/// Writes the requested artifacts as <out_dir>/<name>.{trajectory.csv,ratefit.json,regularity.json,report.json}.
std::vector<std::filesystem::path> write_artifacts(const Scenario& scenario, const ScenarioResult& result,
                                                   const std::filesystem::path& out_dir);

} // namespace regflow
