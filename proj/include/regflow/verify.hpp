#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "regflow/scenario.hpp"

namespace regflow {

struct VerifyOptions {
    std::uint64_t seed = 1;
    /// Adds the deliberately expansive operator to the certificate checks.
    bool negative_control = false;
    std::filesystem::path scenario_dir = REGFLOW_SCENARIO_DIR;
    ScenarioOverrides overrides;
};

struct VerifyItem {
    /// The result being exercised, e.g. "descent along the flow".
    std::string group;
    /// Check name, including the scenario or family it ran on.
    std::string name;
    bool passed = true;
    int n_points = 0;
    /// Most negative slack or margin observed.
    double worst = 0.0;
    double tolerance = 0.0;
};

struct VerifyReport {
    std::vector<VerifyItem> items;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] std::vector<VerifyItem> failures() const;
};

/// x -> 1.5 x, labelled "expansive_control"; used as the negative control.
[[nodiscard]] Operator expansive_control(Eigen::Index dim);

/// Sample spacing of the dense re-runs used for the trajectory inequalities.
inline constexpr double kVerifySpacing = 0.01;
/// Horizon of those re-runs.
inline constexpr double kVerifyHorizon = 20.0;

/// Runs every sampled and trajectory check over the bundled corpus and the built-in families.
[[nodiscard]] VerifyReport verify_all(const VerifyOptions& options = {});

/// True when integrate_flow with EulerUnit and km_iterate agree bit for bit at t = 0..steps.
[[nodiscard]] bool km_euler_identical(const Operator& op, const Point& x0, const LambdaSchedule& schedule, int steps);

/// Re-integrates a continuous scenario at spacing kVerifySpacing over min(t_end, kVerifyHorizon).
[[nodiscard]] Trajectory dense_rerun(const Scenario& scenario);

} // namespace regflow
