#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regflow/flow.hpp"

namespace regflow {

struct Region {
    Point center;
    double radius = 1.0;
};

enum class RegularityMode { linear, hoelder };

/// Residuals below this are excluded from ratio fits.
inline constexpr double kDegeneracyFloor = 1e-12;

/// d(x, Fix T) <= kappa * ||x - T x||^gamma on every retained sample (gamma = 1 in linear mode).
struct RegularityEstimate {
    RegularityMode mode = RegularityMode::linear;
    double kappa = 0.0;
    double gamma = 1.0;
    Region region;
    int n_samples = 0;
    /// Linear: max ratio over median ratio. Hoelder: max of d / (kappa_fit r^gamma), kappa_fit
    /// being the regression intercept before inflation.
    double max_violation = 0.0;
    int excluded = 0;
};

/// d(x, intersection) <= tau * (max_i d(x, C_i))^theta on every retained sample.
struct CollectionEstimate {
    RegularityMode mode = RegularityMode::linear;
    double tau = 0.0;
    double theta = 1.0;
    Region region;
    int n_samples = 0;
    double max_violation = 0.0;
    int excluded = 0;
};

/// slack = RHS - LHS at each point; passed iff worst_slack >= -tolerance.
struct InequalityReport {
    std::string name;
    int n_points = 0;
    double worst_slack = 0.0;
    double tolerance = 0.0;
    bool passed = true;
    int excluded = 0;
};

/// Accumulates slacks into an InequalityReport.
class SlackAccumulator {
public:
    SlackAccumulator(std::string name, double tolerance);
    void add(double slack);
    void skip() { ++excluded_; }
    [[nodiscard]] InequalityReport report() const;

private:
    std::string name_;
    double tolerance_;
    int n_ = 0;
    int excluded_ = 0;
    double worst_ = 0.0;
};

[[nodiscard]] RegularityEstimate estimate_operator_regularity(const Operator& op, const FixSetOracle& oracle,
                                                              const Region& region, int n_samples,
                                                              RegularityMode mode, std::uint64_t seed);

/// d(x, intersection) comes from `intersection` when given, otherwise from an Intersection oracle
/// over `sets`.
[[nodiscard]] CollectionEstimate estimate_collection_regularity(
    const std::vector<PrimitiveSet>& sets, const Region& region, int n_samples, RegularityMode mode,
    std::uint64_t seed, const std::optional<FixSetOracle>& intersection = std::nullopt);

/// ||xdot + x - x*||^2 + ((1 - lam)/lam) ||xdot||^2 <= ||x - x*||^2 at every sample, with xdot
/// reconstructed from the operator. Samples with lam = 0 are skipped.
[[nodiscard]] InequalityReport check_avg_inequality(const Trajectory& traj, const Operator& op, const Point& x_star,
                                                    const LambdaSchedule& schedule, double tol);

struct DescentReports {
    /// d/dt d^2(x, Fix T) <= -lam ||x - Tx||^2
    InequalityReport distance;
    /// d/dt ||x - x*||^2 <= -lam (1 - lam) ||x - Tx||^2 - ||xdot||^2
    InequalityReport fejer;
};

/// Largest sample spacing accepted by check_descent.
inline constexpr double kMaxDescentSpacing = 0.1;
/// Default discretization tolerance for central differences at spacing dt.
[[nodiscard]] inline double descent_tolerance(double dt) { return 10.0 * dt; }

/// Derivatives on the left are central differences of the recorded samples. Samples whose stencil
/// straddles a jump of lambda are skipped.
[[nodiscard]] DescentReports check_descent(const Trajectory& traj, const Operator& op, const FixSetOracle& oracle,
                                           const Point& x_star, const LambdaSchedule& schedule, double tol);

inline constexpr double kClosureTol = 1e-10;

/// sum_i w_i rho_i ||x - T_i x||^2 <= 2 d(x, Fix T) ||x - T x||, T = sum_i w_i T_i.
[[nodiscard]] InequalityReport check_combination_bound(const std::vector<Operator>& ops,
                                                       const std::vector<double>& weights,
                                                       const std::vector<double>& rhos,
                                                       const std::vector<Point>& points, const FixSetOracle& oracle,
                                                       double tol = kClosureTol);

/// sum_i rho_i ||Q_{i-1} x - Q_i x||^2 <= 2 d(x, Fix T) ||x - T x||, Q_i = T_i ... T_1, T = Q_n.
[[nodiscard]] InequalityReport check_composition_bound(const std::vector<Operator>& ops,
                                                       const std::vector<double>& rhos,
                                                       const std::vector<Point>& points, const FixSetOracle& oracle,
                                                       double tol = kClosureTol);

struct CoreIdentityReports {
    /// ||(1-a)u + a v||^2 + a(1-a)||u - v||^2 = (1-a)||u||^2 + a||v||^2, relative 1e-12.
    InequalityReport affine_combination;
    /// Central differences of d^2(., C) against 2(x - P_C x), relative 1e-6 at step 1e-5.
    InequalityReport distance_gradient;
};

[[nodiscard]] CoreIdentityReports check_core_identities(int n_samples, std::uint64_t seed);

/// For 0 < gamma <= theta and a in [0, b]: a^theta <= b^(theta - gamma) a^gamma.
[[nodiscard]] InequalityReport check_exponent_comparison(int n_samples, std::uint64_t seed);

/// ||Tx - Ty|| <= ||x - y|| on random pairs from the region.
[[nodiscard]] InequalityReport check_nonexpansive(const Operator& op, const Region& region, int n_pairs,
                                                  std::uint64_t seed, double tol = 1e-12);
/// ||Tx - Ty||^2 + ((1-a)/a) ||(x - Tx) - (y - Ty)||^2 <= ||x - y||^2; requires meta.alpha.
[[nodiscard]] InequalityReport check_averaged(const Operator& op, const Region& region, int n_pairs,
                                              std::uint64_t seed, double tol = 1e-10);
/// ||Tx - x*||^2 + rho ||x - Tx||^2 <= ||x - x*||^2, x* the oracle projection of a second sample;
/// requires meta.rho and a fix oracle.
[[nodiscard]] InequalityReport check_sqne(const Operator& op, const Region& region, int n_pairs, std::uint64_t seed,
                                          double tol = 1e-10);

} // namespace regflow
