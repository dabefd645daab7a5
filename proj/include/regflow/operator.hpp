#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "regflow/fixset.hpp"
#include "regflow/functions.hpp"

namespace regflow {

struct OperatorMeta {
    /// Averagedness constant in (0,1). Whenever set, rho == (1 - alpha) / alpha.
    std::optional<double> alpha;
    /// Strong quasinonexpansiveness modulus. Never fabricated for combinations.
    std::optional<double> rho;
    std::string label;
    /// Convex-combination weights, or empty.
    std::vector<double> weights;
    /// Moduli of the direct constituents of a combination or composition, in order.
    std::vector<std::optional<double>> constituent_rhos;
    /// False only for operators built from data that is not known to be nonexpansive.
    bool nonexpansive = true;
};

/// An immutable self-map of R^n. Copies share the underlying map.
class Operator {
public:
    using Map = std::function<Point(const Point&)>;

    Operator(Eigen::Index dim, Map eval, OperatorMeta meta, std::optional<FixSetOracle> fix = std::nullopt);

    [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
    [[nodiscard]] const OperatorMeta& meta() const noexcept { return meta_; }
    [[nodiscard]] const std::optional<FixSetOracle>& fix_oracle() const noexcept { return *fix_; }

    /// Evaluates the map; throws UsageError on dimension mismatch.
    Point operator()(const Point& x) const;

    [[nodiscard]] Operator with_fix_oracle(FixSetOracle oracle) const;
    [[nodiscard]] Operator with_label(std::string label) const;

private:
    Eigen::Index dim_;
    std::shared_ptr<const Map> eval_;
    OperatorMeta meta_;
    std::shared_ptr<const std::optional<FixSetOracle>> fix_;
};

[[nodiscard]] Point apply(const Operator& op, const Point& x);

[[nodiscard]] Operator identity(Eigen::Index dim);
/// x -> 0; Fix = {0}.
[[nodiscard]] Operator zero_map(Eigen::Index dim);
/// x -> M x. Flagged nonexpansive only when the spectral norm of M is at most 1.
[[nodiscard]] Operator linear_map(Matrix M);

/// Nearest-point projector; 1/2-averaged with Fix = set.
[[nodiscard]] Operator projector(const PrimitiveSet& set);
/// x -> prox(fn, step, x); firmly nonexpansive.
[[nodiscard]] Operator prox_operator(const SimpleFunction& fn, double step);

/// x -> 2 P(x) - x. Nonexpansive, not averaged.
[[nodiscard]] Operator reflect(const PrimitiveSet& set);

/// x -> prox(g, step, x - step (Qx - c)), requires 0 < step < 2/L and L >= lambda_max(Q).
/// Recorded averagedness: 2 / (4 - step L).
[[nodiscard]] Operator forward_backward(const SimpleFunction& g, const Matrix& Q, const Point& c, double L,
                                        double step);

/// x -> x + P_j(2 P_l x - x) - P_l x, 1/2-averaged.
[[nodiscard]] Operator douglas_rachford(const PrimitiveSet& set_l, const PrimitiveSet& set_j);

/// x -> sum_i w_i T_i(x). Weights must be positive and sum to 1 within 1e-12.
[[nodiscard]] Operator convex_combination(const std::vector<Operator>& ops, const std::vector<double>& weights);

/// x -> T_n(...T_2(T_1(x))...): ops.front() is applied first.
[[nodiscard]] Operator compose(const std::vector<Operator>& ops);

/// x -> (1 - lam) x + lam op(x).
[[nodiscard]] Operator relax(const Operator& op, double lam);

} // namespace regflow
