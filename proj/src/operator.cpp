#include "regflow/operator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <numeric>

namespace regflow {

namespace {

void set_alpha(OperatorMeta& meta, double alpha) {
    meta.alpha = alpha;
    meta.rho = (1.0 - alpha) / alpha;
}

Eigen::Index common_dim(const std::vector<Operator>& ops, const char* what) {
    if (ops.empty()) throw UsageError(std::string(what) + ": empty operator list");
    const auto n = ops.front().dim();
    for (const auto& op : ops) {
        if (op.dim() != n) throw UsageError(std::string(what) + ": operators of different dimension");
    }
    return n;
}

std::string join_labels(const std::vector<Operator>& ops) {
    std::string out;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (i) out += ", ";
        out += ops[i].meta().label;
    }
    return out;
}

} // namespace

Operator::Operator(Eigen::Index dim, Map eval, OperatorMeta meta, std::optional<FixSetOracle> fix)
    : dim_(dim),
      eval_(std::make_shared<const Map>(std::move(eval))),
      meta_(std::move(meta)),
      fix_(std::make_shared<const std::optional<FixSetOracle>>(std::move(fix))) {
    if (dim_ <= 0) throw ConstructionError("operator: dimension must be positive");
    if (fix_->has_value() && (*fix_)->dim() != dim_) throw ConstructionError("operator: fix oracle dimension mismatch");
}

Point Operator::operator()(const Point& x) const {
    require_dim(x, dim_, "apply");
    return (*eval_)(x);
}

Operator Operator::with_fix_oracle(FixSetOracle oracle) const {
    if (oracle.dim() != dim_) throw UsageError("with_fix_oracle: dimension mismatch");
    Operator copy = *this;
    copy.fix_ = std::make_shared<const std::optional<FixSetOracle>>(std::move(oracle));
    return copy;
}

Operator Operator::with_label(std::string label) const {
    Operator copy = *this;
    copy.meta_.label = std::move(label);
    return copy;
}

Point apply(const Operator& op, const Point& x) { return op(x); }

Operator identity(Eigen::Index dim) {
    OperatorMeta meta;
    meta.label = "Id";
    return Operator(dim, [](const Point& x) { return x; }, std::move(meta));
}

Operator zero_map(Eigen::Index dim) {
    OperatorMeta meta;
    meta.label = "0";
    // 0 = (1/2) Id + (1/2)(-Id)
    set_alpha(meta, 0.5);
    return Operator(
        dim, [dim](const Point&) -> Point { return Point::Zero(dim); }, std::move(meta),
        FixSetOracle::point(Point::Zero(dim)));
}

Operator linear_map(Matrix M) {
    if (M.rows() != M.cols() || M.rows() == 0) throw ConstructionError("linear map: matrix must be square");
    if (!M.allFinite()) throw ConstructionError("linear map: non-finite entry");
    OperatorMeta meta;
    meta.label = "linear";
    const double spectral = Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
    meta.nonexpansive = spectral <= 1.0 + 1e-12;
    const auto n = M.rows();
    return Operator(n, [M = std::move(M)](const Point& x) -> Point { return M * x; }, std::move(meta));
}

Operator projector(const PrimitiveSet& set) {
    OperatorMeta meta;
    meta.label = "P[" + set.describe() + "]";
    set_alpha(meta, 0.5);
    return Operator(set.dim(), [set](const Point& x) { return project(set, x); }, std::move(meta),
                    FixSetOracle::exact(set));
}

Operator prox_operator(const SimpleFunction& fn, double step) {
    if (!(step > 0.0)) throw ConstructionError("prox operator: step must be positive");
    const auto n = fn.dim();
    if (n == 0) throw ConstructionError("prox operator: dimension-agnostic function needs an explicit dimension");
    OperatorMeta meta;
    meta.label = "prox";
    set_alpha(meta, 0.5);
    std::optional<FixSetOracle> fix;
    if (const auto* ind = std::get_if<Indicator>(&fn.variant())) fix = FixSetOracle::exact(ind->set);
    return Operator(n, [fn, step](const Point& x) { return prox(fn, step, x); }, std::move(meta), std::move(fix));
}

Operator reflect(const PrimitiveSet& set) {
    OperatorMeta meta;
    meta.label = "R[" + set.describe() + "]";
    return Operator(set.dim(), [set](const Point& x) -> Point { return 2.0 * project(set, x) - x; }, std::move(meta),
                    FixSetOracle::exact(set));
}

Operator forward_backward(const SimpleFunction& g, const Matrix& Q, const Point& c, double L, double step) {
    const auto n = c.size();
    if (Q.rows() != n || Q.cols() != n || n == 0) throw ConstructionError("forward_backward: Q must be n x n with n = dim(c)");
    if (g.dim() != 0 && g.dim() != n) throw ConstructionError("forward_backward: g dimension mismatch");
    if (!(L > 0.0)) throw ConstructionError("forward_backward: L must be positive");
    if (!(step > 0.0 && step < 2.0 / L)) {
        throw ConstructionError("forward_backward: step must lie in (0, 2/L) = (0, " + std::to_string(2.0 / L) + ")");
    }
    // Validates symmetry and positive semidefiniteness.
    (void)SimpleFunction::quadratic(Q, c);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    if (lmax > L * (1.0 + 1e-12)) throw ConstructionError("forward_backward: L below the largest eigenvalue of Q");

    OperatorMeta meta;
    meta.label = "FB";
    set_alpha(meta, 2.0 / (4.0 - step * L));
    return Operator(
        n,
        [g, Q, c, step](const Point& x) -> Point {
            const Point forward = x - step * (Q * x - c);
            return prox(g, step, forward);
        },
        std::move(meta));
}

Operator douglas_rachford(const PrimitiveSet& set_l, const PrimitiveSet& set_j) {
    if (set_l.dim() != set_j.dim()) throw UsageError("douglas_rachford: sets of different dimension");
    OperatorMeta meta;
    meta.label = "DR[" + set_l.describe() + "; " + set_j.describe() + "]";
    set_alpha(meta, 0.5);
    return Operator(
        set_l.dim(),
        [set_l, set_j](const Point& x) -> Point {
            const Point pl = project(set_l, x);
            return x + project(set_j, 2.0 * pl - x) - pl;
        },
        std::move(meta));
}

Operator convex_combination(const std::vector<Operator>& ops, const std::vector<double>& weights) {
    const auto n = common_dim(ops, "convex_combination");
    if (weights.size() != ops.size()) throw UsageError("convex_combination: need one weight per operator");
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw UsageError("convex_combination: weights must be strictly positive");
    }
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12) {
        throw UsageError("convex_combination: weights sum to " + std::to_string(sum) + ", not 1");
    }
    OperatorMeta meta;
    meta.label = "sum(" + join_labels(ops) + ")";
    meta.weights = weights;
    for (const auto& op : ops) {
        meta.constituent_rhos.push_back(op.meta().rho);
        meta.nonexpansive = meta.nonexpansive && op.meta().nonexpansive;
    }
    return Operator(
        n,
        [ops, weights, n](const Point& x) -> Point {
            Point out = Point::Zero(n);
            for (std::size_t i = 0; i < ops.size(); ++i) out += weights[i] * ops[i](x);
            return out;
        },
        std::move(meta));
}

Operator compose(const std::vector<Operator>& ops) {
    const auto n = common_dim(ops, "compose");
    OperatorMeta meta;
    meta.label = "compose(" + join_labels(ops) + ")";
    for (const auto& op : ops) {
        meta.constituent_rhos.push_back(op.meta().rho);
        meta.nonexpansive = meta.nonexpansive && op.meta().nonexpansive;
    }
    return Operator(
        n,
        [ops](const Point& x) -> Point {
            Point y = x;
            for (const auto& op : ops) y = op(y);
            return y;
        },
        std::move(meta));
}

Operator relax(const Operator& op, double lam) {
    if (!(lam >= 0.0 && lam <= 1.0)) throw UsageError("relax: lambda must lie in [0, 1]");
    OperatorMeta meta;
    meta.label = "relax(" + op.meta().label + ", " + std::to_string(lam) + ")";
    meta.nonexpansive = op.meta().nonexpansive;
    if (op.meta().nonexpansive && lam > 0.0 && lam < 1.0) set_alpha(meta, lam);
    if (lam == 1.0) {
        meta.alpha = op.meta().alpha;
        meta.rho = op.meta().rho;
    }
    std::optional<FixSetOracle> fix;
    if (lam > 0.0) fix = op.fix_oracle();
    return Operator(
        op.dim(), [op, lam](const Point& x) -> Point { return (1.0 - lam) * x + lam * op(x); }, std::move(meta),
        std::move(fix));
}

} // namespace regflow
