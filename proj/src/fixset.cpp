#include "regflow/fixset.hpp"

#include <Eigen/QR>

#include <algorithm>

#include "regflow/operator.hpp"

namespace regflow {

struct FixSetOracle::AffineSystem {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    Matrix N;
    Point b;
};

namespace {

double max_violation(const std::vector<PrimitiveSet>& sets, const Point& x) {
    double worst = 0.0;
    for (const auto& s : sets) worst = std::max(worst, distance(s, x));
    return worst;
}

} // namespace

FixSetOracle::FixSetOracle(Variant v, Eigen::Index dim) : oracle_(std::move(v)), dim_(dim) {
    if (const auto* inter = std::get_if<IntersectionOracle>(&oracle_)) {
        const bool all_affine =
            std::all_of(inter->sets.begin(), inter->sets.end(), [](const PrimitiveSet& s) { return s.is_affine(); });
        if (all_affine) {
            auto sys = std::make_shared<AffineSystem>();
            Eigen::Index rows = 0;
            for (const auto& s : inter->sets) {
                if (std::holds_alternative<Hyperplane>(s.variant())) rows += 1;
                else rows += dim;
            }
            sys->N = Matrix::Zero(rows, dim);
            sys->b = Point::Zero(rows);
            Eigen::Index r = 0;
            for (const auto& s : inter->sets) {
                if (const auto* h = std::get_if<Hyperplane>(&s.variant())) {
                    sys->N.row(r) = h->a.transpose();
                    sys->b[r] = h->b;
                    ++r;
                } else {
                    const auto& aff = std::get<AffineSubspace>(s.variant());
                    // (I - QQ^T)(x - offset) = 0
                    const Matrix complement =
                        Matrix::Identity(dim, dim) - aff.orthonormal * aff.orthonormal.transpose();
                    sys->N.middleRows(r, dim) = complement;
                    sys->b.segment(r, dim) = complement * aff.offset;
                    r += dim;
                }
            }
            sys->cod.setThreshold(1e-12);
            sys->cod.compute(sys->N);
            affine_ = std::move(sys);
        }
    }
}

FixSetOracle FixSetOracle::exact(PrimitiveSet set) {
    const auto n = set.dim();
    return FixSetOracle(ExactSetOracle{std::move(set)}, n);
}

FixSetOracle FixSetOracle::intersection(std::vector<PrimitiveSet> sets, double tol, int max_iter) {
    if (sets.empty()) throw ConstructionError("intersection oracle: no sets");
    if (!(tol > 0.0)) throw ConstructionError("intersection oracle: tol must be positive");
    if (max_iter < 1) throw ConstructionError("intersection oracle: max_iter must be positive");
    const auto n = sets.front().dim();
    for (const auto& s : sets) {
        if (s.dim() != n) throw ConstructionError("intersection oracle: sets of different dimension");
    }
    FixSetOracle oracle(IntersectionOracle{std::move(sets), tol, max_iter}, n);
    try {
        const auto probe = oracle.distance(Point::Zero(n));
        const auto& inter = std::get<IntersectionOracle>(oracle.oracle_);
        if (max_violation(inter.sets, probe.witness) >= tol) {
            throw ConstructionError("intersection oracle: intersection appears empty (probe violation " +
                                    std::to_string(probe.certified_tol) + ")");
        }
    } catch (const ConvergenceError& e) {
        throw ConstructionError(std::string("intersection oracle: feasibility probe failed: ") + e.what());
    }
    return oracle;
}

FixSetOracle FixSetOracle::point(Point p) {
    if (p.size() == 0 || !p.allFinite()) throw ConstructionError("point oracle: invalid point");
    const auto n = p.size();
    return FixSetOracle(SinglePointOracle{std::move(p)}, n);
}

FixSetOracle FixSetOracle::with_tolerance(double tol, int max_iter) const {
    if (const auto* inter = std::get_if<IntersectionOracle>(&oracle_)) {
        return intersection(inter->sets, tol, max_iter);
    }
    return *this;
}

DistanceResult FixSetOracle::distance(const Point& x) const {
    require_dim(x, dim_, "distance_to_fix");
    return std::visit(
        [&](const auto& o) -> DistanceResult {
            using O = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<O, ExactSetOracle>) {
                Point w = project(o.set, x);
                const double d = (x - w).norm();
                return {d, std::move(w), 0.0};
            } else if constexpr (std::is_same_v<O, SinglePointOracle>) {
                return {(x - o.p).norm(), o.p, 0.0};
            } else if (affine_) {
                Point w = x - affine_->cod.solve(affine_->N * x - affine_->b);
                const double d = (x - w).norm();
                const double viol = max_violation(o.sets, w);
                return {d, std::move(w), viol};
            } else {
                return dykstra_project(o.sets, x, o.tol, o.max_iter);
            }
        },
        oracle_);
}

double residual(const Operator& op, const Point& x) { return (x - op(x)).norm(); }

DistanceResult dykstra_project(const std::vector<PrimitiveSet>& sets, const Point& x, double tol, int max_iter) {
    if (sets.empty()) throw UsageError("dykstra_project: no sets");
    if (!(tol > 0.0)) throw UsageError("dykstra_project: tol must be positive");
    for (const auto& s : sets) require_dim(x, s.dim(), "dykstra_project");

    const auto m = sets.size();
    std::vector<Point> increments(m, Point::Zero(x.size()));
    Point current = x;
    double movement = 0.0;
    double violation = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        const Point start = current;
        for (std::size_t i = 0; i < m; ++i) {
            const Point shifted = current + increments[i];
            current = project(sets[i], shifted);
            increments[i] = shifted - current;
        }
        movement = (current - start).norm();
        violation = max_violation(sets, current);
        if (movement < tol && violation < tol) {
            return {(x - current).norm(), current, std::max(movement, violation)};
        }
    }
    DistanceResult best{(x - current).norm(), current, std::max(movement, violation)};
    throw ConvergenceError("dykstra_project: no convergence in " + std::to_string(max_iter) +
                               " cycles (certified " + std::to_string(best.certified_tol) + ")",
                           std::move(best));
}

DistanceResult distance_to_fix(const FixSetOracle& oracle, const Point& x) { return oracle.distance(x); }

} // namespace regflow
