#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "regflow/flow.hpp"

namespace regflow {

/// Shortest round-tripping text for a double, locale independent.
[[nodiscard]] std::string format_double(double v);

/// Header `t,x_0,...,x_{n-1},residual,dist_fix,speed`; dist_fix is left empty when unknown.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj);

/// Inverse of write_trajectory_csv. Throws UsageError on malformed input.
[[nodiscard]] Trajectory read_trajectory_csv(std::istream& in);
[[nodiscard]] Trajectory read_trajectory_csv(const std::filesystem::path& file);

} // namespace regflow
