#include "regflow/functions.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <limits>

namespace regflow {

SimpleFunction SimpleFunction::indicator(PrimitiveSet set) { return SimpleFunction(Indicator{std::move(set)}); }

SimpleFunction SimpleFunction::l1(double weight) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) throw ConstructionError("l1: weight must be finite and >= 0");
    return SimpleFunction(L1Norm{weight});
}

SimpleFunction SimpleFunction::quadratic(Matrix Q, Point c) {
    if (Q.rows() != Q.cols() || Q.rows() != c.size() || c.size() == 0)
        throw ConstructionError("quadratic: Q must be square and match c");
    if (!Q.allFinite() || !c.allFinite()) throw ConstructionError("quadratic: non-finite entry");
    const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw ConstructionError("quadratic: Q not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale) throw ConstructionError("quadratic: Q not positive semidefinite");
    return SimpleFunction(Quadratic{std::move(Q), std::move(c)});
}

Eigen::Index SimpleFunction::dim() const noexcept {
    return std::visit(
        [](const auto& f) -> Eigen::Index {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, Indicator>) return f.set.dim();
            else if constexpr (std::is_same_v<F, Quadratic>) return f.c.size();
            else return 0;
        },
        fn_);
}

double SimpleFunction::value(const Point& x) const {
    return std::visit(
        [&](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, Indicator>) {
                return distance(f.set, x) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            } else if constexpr (std::is_same_v<F, L1Norm>) {
                return f.weight * x.lpNorm<1>();
            } else {
                require_dim(x, f.c.size(), "quadratic value");
                return 0.5 * x.dot(f.Q * x) - f.c.dot(x);
            }
        },
        fn_);
}

Point prox(const SimpleFunction& fn, double step, const Point& x) {
    if (!(step > 0.0) || !std::isfinite(step)) throw UsageError("prox: step must be positive");
    return std::visit(
        [&](const auto& f) -> Point {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, Indicator>) {
                return project(f.set, x);
            } else if constexpr (std::is_same_v<F, L1Norm>) {
                const double t = step * f.weight;
                return x.unaryExpr([t](double v) { return v > t ? v - t : (v < -t ? v + t : 0.0); });
            } else {
                require_dim(x, f.c.size(), "prox");
                const auto n = f.c.size();
                // (I + step Q) z = x + step c
                const Matrix system = Matrix::Identity(n, n) + step * f.Q;
                return system.llt().solve(x + step * f.c);
            }
        },
        fn.variant());
}

} // namespace regflow
