#include "regflow/sets.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <sstream>

namespace regflow {

namespace {

void require_finite(const Point& p, const char* what) {
    if (p.size() == 0) throw ConstructionError(std::string(what) + ": empty vector");
    if (!p.allFinite()) throw ConstructionError(std::string(what) + ": non-finite coordinate");
}

void require_normal(const Point& a, double b, const char* what) {
    require_finite(a, what);
    if (a.squaredNorm() == 0.0) throw ConstructionError(std::string(what) + ": zero normal vector");
    if (!std::isfinite(b)) throw ConstructionError(std::string(what) + ": non-finite offset");
}

} // namespace

PrimitiveSet PrimitiveSet::halfspace(Point a, double b) {
    require_normal(a, b, "halfspace");
    const auto n = a.size();
    return PrimitiveSet(HalfSpace{std::move(a), b}, n);
}

PrimitiveSet PrimitiveSet::hyperplane(Point a, double b) {
    require_normal(a, b, "hyperplane");
    const auto n = a.size();
    return PrimitiveSet(Hyperplane{std::move(a), b}, n);
}

PrimitiveSet PrimitiveSet::affine(Matrix basis, Point offset) {
    require_finite(offset, "affine subspace offset");
    const auto n = offset.size();
    if (basis.rows() != n) throw ConstructionError("affine subspace: basis rows must equal offset dimension");
    if (!basis.allFinite()) throw ConstructionError("affine subspace: non-finite basis entry");

    Matrix q(n, 0);
    if (basis.cols() > 0) {
        Eigen::ColPivHouseholderQR<Matrix> qr(basis);
        qr.setThreshold(1e-12);
        const auto rank = qr.rank();
        Matrix full = qr.householderQ();
        q = full.leftCols(rank);
    }
    return PrimitiveSet(AffineSubspace{std::move(basis), std::move(offset), std::move(q)}, n);
}

PrimitiveSet PrimitiveSet::box(Point lower, Point upper) {
    require_finite(lower, "box lower");
    require_finite(upper, "box upper");
    if (lower.size() != upper.size()) throw ConstructionError("box: lower/upper dimension mismatch");
    if ((lower.array() > upper.array()).any()) throw ConstructionError("box: lower > upper in some coordinate");
    const auto n = lower.size();
    return PrimitiveSet(Box{std::move(lower), std::move(upper)}, n);
}

PrimitiveSet PrimitiveSet::ball(Point center, double radius) {
    require_finite(center, "ball center");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ConstructionError("ball: radius must be positive and finite");
    const auto n = center.size();
    return PrimitiveSet(Ball{std::move(center), radius}, n);
}

bool PrimitiveSet::is_affine() const noexcept {
    return std::holds_alternative<Hyperplane>(set_) || std::holds_alternative<AffineSubspace>(set_);
}

std::string PrimitiveSet::describe() const {
    std::ostringstream os;
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, HalfSpace>) os << "halfspace";
            else if constexpr (std::is_same_v<S, Hyperplane>) os << "hyperplane";
            else if constexpr (std::is_same_v<S, AffineSubspace>) os << "affine(rank " << s.orthonormal.cols() << ")";
            else if constexpr (std::is_same_v<S, Box>) os << "box";
            else os << "ball(r=" << s.radius << ")";
        },
        set_);
    os << " in R^" << dim_;
    return os.str();
}

Point project(const PrimitiveSet& set, const Point& x) {
    require_dim(x, set.dim(), "project");
    return std::visit(
        [&](const auto& s) -> Point {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, HalfSpace>) {
                const double excess = s.a.dot(x) - s.b;
                if (excess <= 0.0) return x;
                return x - (excess / s.a.squaredNorm()) * s.a;
            } else if constexpr (std::is_same_v<S, Hyperplane>) {
                const double excess = s.a.dot(x) - s.b;
                return x - (excess / s.a.squaredNorm()) * s.a;
            } else if constexpr (std::is_same_v<S, AffineSubspace>) {
                const Point shifted = x - s.offset;
                return s.offset + s.orthonormal * (s.orthonormal.transpose() * shifted);
            } else if constexpr (std::is_same_v<S, Box>) {
                return x.cwiseMax(s.lower).cwiseMin(s.upper);
            } else {
                const Point v = x - s.center;
                const double r = v.norm();
                if (r <= s.radius) return x;
                return s.center + (s.radius / r) * v;
            }
        },
        set.variant());
}

double distance(const PrimitiveSet& set, const Point& x) { return (x - project(set, x)).norm(); }

} // namespace regflow
