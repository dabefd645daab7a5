#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "regflow/sets.hpp"

namespace regflow {

class Operator;

struct DistanceResult {
    double distance = 0.0;
    Point witness;
    /// Max constraint violation (and, for Dykstra, last cycle movement) at the witness.
    double certified_tol = 0.0;
};

/// Dykstra ran out of iterations; `best` holds the last iterate.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, DistanceResult best)
        : NumericError(what), best_(std::move(best)) {}
    [[nodiscard]] const DistanceResult& best() const noexcept { return best_; }

private:
    DistanceResult best_;
};

inline constexpr double kDefaultFixTol = 1e-12;
inline constexpr int kDefaultFixMaxIter = 100000;

struct ExactSetOracle {
    PrimitiveSet set;
};

struct IntersectionOracle {
    std::vector<PrimitiveSet> sets;
    double tol;
    int max_iter;
};

struct SinglePointOracle {
    Point p;
};

/// Evaluates d(x, Fix T) for an operator whose fixed set is declared by the caller.
class FixSetOracle {
public:
    using Variant = std::variant<ExactSetOracle, IntersectionOracle, SinglePointOracle>;

    static FixSetOracle exact(PrimitiveSet set);
    /// Validates nonemptiness by projecting the origin; throws ConstructionError if that fails.
    static FixSetOracle intersection(std::vector<PrimitiveSet> sets, double tol = kDefaultFixTol,
                                     int max_iter = kDefaultFixMaxIter);
    static FixSetOracle point(Point p);

    [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
    [[nodiscard]] const Variant& variant() const noexcept { return oracle_; }

    /// Same oracle with Dykstra parameters replaced (no-op for the closed-form variants).
    [[nodiscard]] FixSetOracle with_tolerance(double tol, int max_iter) const;

    [[nodiscard]] DistanceResult distance(const Point& x) const;

private:
    FixSetOracle(Variant v, Eigen::Index dim);

    Variant oracle_;
    Eigen::Index dim_;
    /// Constraint form N x = b of an all-affine intersection, solved exactly.
    struct AffineSystem;
    std::shared_ptr<const AffineSystem> affine_;
};

/// ||x - op(x)||
[[nodiscard]] double residual(const Operator& op, const Point& x);

/// Dykstra's algorithm. Stops once a full cycle moves the iterate less than tol and every
/// set is violated by less than tol.
[[nodiscard]] DistanceResult dykstra_project(const std::vector<PrimitiveSet>& sets, const Point& x,
                                             double tol = kDefaultFixTol, int max_iter = kDefaultFixMaxIter);

[[nodiscard]] DistanceResult distance_to_fix(const FixSetOracle& oracle, const Point& x);

} // namespace regflow
