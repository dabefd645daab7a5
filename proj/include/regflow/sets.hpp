#pragma once

#include <string>
#include <variant>

#include "regflow/point.hpp"

namespace regflow {

/// Closed convex sets with closed-form nearest-point projections.
struct HalfSpace {
    Point a;  ///< outward normal, nonzero
    double b; ///< {x : <a,x> <= b}
};

struct Hyperplane {
    Point a;
    double b; ///< {x : <a,x> = b}
};

/// {offset + basis * y}. The orthonormal basis is computed once at construction.
struct AffineSubspace {
    Matrix basis;      ///< n x k, columns span the direction space (as supplied)
    Point offset;
    Matrix orthonormal; ///< n x rank, orthonormal columns
};

struct Box {
    Point lower;
    Point upper;
};

struct Ball {
    Point center;
    double radius;
};

class PrimitiveSet {
public:
    using Variant = std::variant<HalfSpace, Hyperplane, AffineSubspace, Box, Ball>;

    static PrimitiveSet halfspace(Point a, double b);
    static PrimitiveSet hyperplane(Point a, double b);
    /// Rank decisions use a relative tolerance of 1e-12 on the R diagonal.
    static PrimitiveSet affine(Matrix basis, Point offset);
    static PrimitiveSet box(Point lower, Point upper);
    static PrimitiveSet ball(Point center, double radius);

    [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
    [[nodiscard]] const Variant& variant() const noexcept { return set_; }
    [[nodiscard]] std::string describe() const;

    /// Hyperplanes and affine subspaces.
    [[nodiscard]] bool is_affine() const noexcept;

private:
    explicit PrimitiveSet(Variant v, Eigen::Index dim) : set_(std::move(v)), dim_(dim) {}
    Variant set_;
    Eigen::Index dim_;
};

/// Nearest point of the set to x.
[[nodiscard]] Point project(const PrimitiveSet& set, const Point& x);

/// d(x, set), computed as ||x - project(set, x)||.
[[nodiscard]] double distance(const PrimitiveSet& set, const Point& x);

} // namespace regflow
