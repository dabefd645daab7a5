#include "regflow/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "regflow/least_squares.hpp"
#include "regflow/sampling.hpp"

namespace regflow {

namespace {

void validate_region(const Region& region) {
    if (!(region.radius > 0.0)) throw UsageError("region: radius must be positive");
    if (region.center.size() == 0) throw UsageError("region: empty center");
}

struct BoundFit {
    double constant = 0.0;
    double exponent = 1.0;
    double max_violation = 0.0;
};

/// Fits dist <= constant * measure^exponent over pairs with measure above the degeneracy floor.
BoundFit fit_bound(const std::vector<double>& dist, const std::vector<double>& measure, RegularityMode mode) {
    BoundFit fit;
    if (mode == RegularityMode::linear) {
        std::vector<double> ratios;
        ratios.reserve(dist.size());
        for (std::size_t i = 0; i < dist.size(); ++i) ratios.push_back(dist[i] / measure[i]);
        fit.constant = *std::max_element(ratios.begin(), ratios.end());
        auto mid = ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2);
        std::nth_element(ratios.begin(), mid, ratios.end());
        fit.max_violation = *mid > 0.0 ? fit.constant / *mid : std::numeric_limits<double>::infinity();
        return fit;
    }

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] > 0.0) {
            lx.push_back(std::log(measure[i]));
            ly.push_back(std::log(dist[i]));
        }
    }
    if (lx.size() < 2) throw DegenerateEstimateError("hoelder fit: fewer than two samples with positive distance");
    const auto line = fit_line(lx, ly);
    if (!(line.slope > 0.0)) {
        throw DegenerateEstimateError("hoelder fit: non-positive log-log slope " + std::to_string(line.slope));
    }
    fit.exponent = std::min(line.slope, 1.0);
    const double fitted = std::exp(line.intercept);
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const double bound = std::pow(measure[i], fit.exponent);
        fit.constant = std::max(fit.constant, dist[i] / bound);
        fit.max_violation = std::max(fit.max_violation, dist[i] / (fitted * bound));
    }
    return fit;
}

double sq(double v) { return v * v; }

} // namespace

SlackAccumulator::SlackAccumulator(std::string name, double tolerance)
    : name_(std::move(name)), tolerance_(tolerance), worst_(std::numeric_limits<double>::infinity()) {}

void SlackAccumulator::add(double slack) {
    ++n_;
    if (std::isnan(slack)) slack = -std::numeric_limits<double>::infinity();
    worst_ = std::min(worst_, slack);
}

InequalityReport SlackAccumulator::report() const {
    InequalityReport r;
    r.name = name_;
    r.n_points = n_;
    r.worst_slack = n_ > 0 ? worst_ : 0.0;
    r.tolerance = tolerance_;
    r.passed = r.worst_slack >= -tolerance_;
    r.excluded = excluded_;
    return r;
}

RegularityEstimate estimate_operator_regularity(const Operator& op, const FixSetOracle& oracle, const Region& region,
                                                int n_samples, RegularityMode mode, std::uint64_t seed) {
    validate_region(region);
    if (n_samples < 100) throw UsageError("estimate_operator_regularity: need at least 100 samples");
    require_dim(region.center, op.dim(), "estimate_operator_regularity");
    if (oracle.dim() != op.dim()) throw UsageError("estimate_operator_regularity: oracle dimension mismatch");

    BallSampler sampler(region.center, region.radius, seed);
    std::vector<double> dist, res;
    int excluded = 0;
    for (int i = 0; i < n_samples; ++i) {
        const Point x = sampler.next();
        const double r = residual(op, x);
        if (r < kDegeneracyFloor) {
            ++excluded;
            continue;
        }
        dist.push_back(oracle.distance(x).distance);
        res.push_back(r);
    }
    if (dist.empty()) {
        throw DegenerateEstimateError("estimate_operator_regularity: every sample has residual below the degeneracy floor");
    }
    const auto fit = fit_bound(dist, res, mode);
    RegularityEstimate est;
    est.mode = mode;
    est.kappa = fit.constant;
    est.gamma = fit.exponent;
    est.region = region;
    est.n_samples = n_samples;
    est.max_violation = fit.max_violation;
    est.excluded = excluded;
    return est;
}

CollectionEstimate estimate_collection_regularity(const std::vector<PrimitiveSet>& sets, const Region& region,
                                                  int n_samples, RegularityMode mode, std::uint64_t seed,
                                                  const std::optional<FixSetOracle>& intersection) {
    validate_region(region);
    if (n_samples < 100) throw UsageError("estimate_collection_regularity: need at least 100 samples");
    if (sets.empty()) throw UsageError("estimate_collection_regularity: no sets");
    for (const auto& s : sets) require_dim(region.center, s.dim(), "estimate_collection_regularity");
    const FixSetOracle oracle = intersection ? *intersection : FixSetOracle::intersection(sets);

    BallSampler sampler(region.center, region.radius, seed);
    std::vector<double> dist, worst;
    int excluded = 0;
    for (int i = 0; i < n_samples; ++i) {
        const Point x = sampler.next();
        double m = 0.0;
        for (const auto& s : sets) m = std::max(m, distance(s, x));
        if (m < kDegeneracyFloor) {
            ++excluded;
            continue;
        }
        dist.push_back(oracle.distance(x).distance);
        worst.push_back(m);
    }
    if (dist.empty()) throw DegenerateEstimateError("estimate_collection_regularity: all samples lie in every set");
    const auto fit = fit_bound(dist, worst, mode);
    CollectionEstimate est;
    est.mode = mode;
    est.tau = fit.constant;
    est.theta = fit.exponent;
    est.region = region;
    est.n_samples = n_samples;
    est.max_violation = fit.max_violation;
    est.excluded = excluded;
    return est;
}

InequalityReport check_avg_inequality(const Trajectory& traj, const Operator& op, const Point& x_star,
                                      const LambdaSchedule& schedule, double tol) {
    require_dim(x_star, op.dim(), "check_avg_inequality");
    if (residual(op, x_star) >= 1e-9) throw UsageError("check_avg_inequality: x_star is not a fixed point");
    SlackAccumulator acc("averaged_step_inequality", tol);
    for (const auto& s : traj.samples) {
        const double lam = schedule(s.t);
        if (lam == 0.0) {
            acc.skip();
            continue;
        }
        const Point xdot = lam * (op(s.x) - s.x);
        const double lhs = (xdot + s.x - x_star).squaredNorm() + ((1.0 - lam) / lam) * xdot.squaredNorm();
        const double rhs = (s.x - x_star).squaredNorm();
        acc.add(rhs - lhs);
    }
    return acc.report();
}

DescentReports check_descent(const Trajectory& traj, const Operator& op, const FixSetOracle& oracle,
                             const Point& x_star, const LambdaSchedule& schedule, double tol) {
    const auto& s = traj.samples;
    if (s.size() < 3) throw UsageError("check_descent: need at least three samples");
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i].t - s[i - 1].t > kMaxDescentSpacing * (1.0 + 1e-9)) {
            throw UsageError("check_descent: sample spacing exceeds " + std::to_string(kMaxDescentSpacing) +
                             "; record the trajectory with a denser sampling");
        }
    }
    std::vector<double> d2(s.size()), e2(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        d2[i] = sq(oracle.distance(s[i].x).distance);
        e2[i] = (s[i].x - x_star).squaredNorm();
    }
    const auto& jumps = schedule.discontinuities();
    SlackAccumulator dist_acc("distance_descent", tol);
    SlackAccumulator fejer_acc("fejer_descent", tol);
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double lo = s[i - 1].t;
        const double hi = s[i + 1].t;
        const bool straddles = std::any_of(jumps.begin(), jumps.end(), [&](double b) { return b > lo && b < hi; });
        if (straddles) {
            dist_acc.skip();
            fejer_acc.skip();
            continue;
        }
        const double span = hi - lo;
        const double lam = schedule(s[i].t);
        const double r2 = sq(residual(op, s[i].x));
        const double speed2 = lam * lam * r2;
        dist_acc.add(-lam * r2 - (d2[i + 1] - d2[i - 1]) / span);
        fejer_acc.add(-lam * (1.0 - lam) * r2 - speed2 - (e2[i + 1] - e2[i - 1]) / span);
    }
    return {dist_acc.report(), fejer_acc.report()};
}

InequalityReport check_combination_bound(const std::vector<Operator>& ops, const std::vector<double>& weights,
                                         const std::vector<double>& rhos, const std::vector<Point>& points,
                                         const FixSetOracle& oracle, double tol) {
    if (rhos.size() != ops.size()) throw UsageError("check_combination_bound: need one modulus per operator");
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const auto& rho = ops[i].meta().rho;
        if (!rho) throw UsageError("check_combination_bound: operator " + std::to_string(i) + " has no SQNE modulus");
        if (!(rhos[i] > 0.0) || rhos[i] > *rho * (1.0 + 1e-12)) {
            throw UsageError("check_combination_bound: modulus " + std::to_string(i) + " exceeds the certified value");
        }
    }
    const Operator combo = convex_combination(ops, weights);
    SlackAccumulator acc("convex_combination_bound", tol);
    for (const auto& x : points) {
        double lhs = 0.0;
        for (std::size_t i = 0; i < ops.size(); ++i) lhs += weights[i] * rhos[i] * (x - ops[i](x)).squaredNorm();
        const double rhs = 2.0 * oracle.distance(x).distance * (x - combo(x)).norm();
        acc.add(rhs - lhs);
    }
    return acc.report();
}

InequalityReport check_composition_bound(const std::vector<Operator>& ops, const std::vector<double>& rhos,
                                         const std::vector<Point>& points, const FixSetOracle& oracle, double tol) {
    if (ops.empty()) throw UsageError("check_composition_bound: empty operator list");
    if (rhos.size() != ops.size()) throw UsageError("check_composition_bound: need one modulus per operator");
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const auto& rho = ops[i].meta().rho;
        if (!rho) throw UsageError("check_composition_bound: operator " + std::to_string(i) + " has no SQNE modulus");
        if (!(rhos[i] > 0.0) || rhos[i] > *rho * (1.0 + 1e-12)) {
            throw UsageError("check_composition_bound: modulus " + std::to_string(i) + " exceeds the certified value");
        }
    }
    SlackAccumulator acc("composition_bound", tol);
    for (const auto& x : points) {
        double lhs = 0.0;
        Point partial = x;
        for (std::size_t i = 0; i < ops.size(); ++i) {
            Point next = ops[i](partial);
            lhs += rhos[i] * (partial - next).squaredNorm();
            partial = std::move(next);
        }
        const double rhs = 2.0 * oracle.distance(x).distance * (x - partial).norm();
        acc.add(rhs - lhs);
    }
    return acc.report();
}

namespace {

PrimitiveSet random_set(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto gauss_vec = [&](Eigen::Index m) {
        Point p(m);
        for (Eigen::Index i = 0; i < m; ++i) p[i] = g(rng);
        return p;
    };
    switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
        case 0: return PrimitiveSet::halfspace(gauss_vec(n), g(rng));
        case 1: return PrimitiveSet::hyperplane(gauss_vec(n), g(rng));
        case 2: {
            const auto k = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
            Matrix basis(n, k);
            for (Eigen::Index j = 0; j < k; ++j) basis.col(j) = gauss_vec(n);
            return PrimitiveSet::affine(basis, gauss_vec(n));
        }
        case 3: {
            const Point lo = gauss_vec(n);
            Point width(n);
            for (Eigen::Index i = 0; i < n; ++i) width[i] = 2.0 * u(rng);
            return PrimitiveSet::box(lo, lo + width);
        }
        default: return PrimitiveSet::ball(gauss_vec(n), 0.2 + 2.0 * u(rng));
    }
}

} // namespace

CoreIdentityReports check_core_identities(int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw UsageError("check_core_identities: need at least one sample");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> alpha_dist(-2.0, 2.0);
    std::uniform_int_distribution<Eigen::Index> dim_dist(1, 8);
    auto gauss_vec = [&](Eigen::Index m, double scale) {
        Point p(m);
        for (Eigen::Index i = 0; i < m; ++i) p[i] = scale * g(rng);
        return p;
    };

    SlackAccumulator identity("affine_combination_identity", 1e-12);
    for (int k = 0; k < n_samples; ++k) {
        const auto n = dim_dist(rng);
        const double a = alpha_dist(rng);
        const Point u = gauss_vec(n, 3.0);
        const Point v = gauss_vec(n, 3.0);
        const double t1 = ((1.0 - a) * u + a * v).squaredNorm();
        const double t2 = a * (1.0 - a) * (u - v).squaredNorm();
        const double r1 = (1.0 - a) * u.squaredNorm();
        const double r2 = a * v.squaredNorm();
        const double scale = std::max(std::abs(t1) + std::abs(t2) + std::abs(r1) + std::abs(r2),
                                      std::numeric_limits<double>::min());
        identity.add(-std::abs((t1 + t2) - (r1 + r2)) / scale);
    }

    constexpr double h = 1e-5;
    SlackAccumulator gradient("distance_gradient", 1e-6);
    for (int k = 0; k < n_samples; ++k) {
        const auto n = dim_dist(rng);
        const PrimitiveSet set = random_set(rng, n);
        const Point x = gauss_vec(n, 3.0);
        const Point analytic = 2.0 * (x - project(set, x));
        Point numeric(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            Point xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            numeric[i] = (sq(distance(set, xp)) - sq(distance(set, xm))) / (2.0 * h);
        }
        const double scale = std::max(1.0, analytic.norm());
        gradient.add(-(numeric - analytic).norm() / scale);
    }
    return {identity.report(), gradient.report()};
}

InequalityReport check_exponent_comparison(int n_samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SlackAccumulator acc("exponent_comparison", 1e-12);
    for (int k = 0; k < n_samples; ++k) {
        const double theta = 0.01 + 0.99 * u(rng);
        const double gamma = theta * (0.01 + 0.99 * u(rng));
        const double b = 0.01 + 10.0 * u(rng);
        for (int j = 0; j <= 100; ++j) {
            const double a = b * j / 100.0;
            const double lhs = std::pow(a, theta);
            const double rhs = std::pow(b, theta - gamma) * std::pow(a, gamma);
            acc.add((rhs - lhs) / std::max(1.0, rhs));
        }
    }
    return acc.report();
}

InequalityReport check_nonexpansive(const Operator& op, const Region& region, int n_pairs, std::uint64_t seed,
                                    double tol) {
    validate_region(region);
    BallSampler sampler(region.center, region.radius, seed);
    SlackAccumulator acc("nonexpansive[" + op.meta().label + "]", tol);
    for (int k = 0; k < n_pairs; ++k) {
        const Point x = sampler.next();
        const Point y = sampler.next();
        acc.add((x - y).norm() - (op(x) - op(y)).norm());
    }
    return acc.report();
}

InequalityReport check_averaged(const Operator& op, const Region& region, int n_pairs, std::uint64_t seed, double tol) {
    validate_region(region);
    if (!op.meta().alpha) throw UsageError("check_averaged: operator has no averagedness constant");
    const double a = *op.meta().alpha;
    BallSampler sampler(region.center, region.radius, seed);
    SlackAccumulator acc("averaged[" + op.meta().label + "]", tol);
    for (int k = 0; k < n_pairs; ++k) {
        const Point x = sampler.next();
        const Point y = sampler.next();
        const Point tx = op(x);
        const Point ty = op(y);
        const double lhs = (tx - ty).squaredNorm() + ((1.0 - a) / a) * ((x - tx) - (y - ty)).squaredNorm();
        acc.add((x - y).squaredNorm() - lhs);
    }
    return acc.report();
}

InequalityReport check_sqne(const Operator& op, const Region& region, int n_pairs, std::uint64_t seed, double tol) {
    validate_region(region);
    if (!op.meta().rho) throw UsageError("check_sqne: operator has no SQNE modulus");
    if (!op.fix_oracle()) throw UsageError("check_sqne: operator has no fixed-set oracle");
    const double rho = *op.meta().rho;
    BallSampler sampler(region.center, region.radius, seed);
    SlackAccumulator acc("sqne[" + op.meta().label + "]", tol);
    for (int k = 0; k < n_pairs; ++k) {
        const Point x = sampler.next();
        const Point fixed = op.fix_oracle()->distance(sampler.next()).witness;
        const Point tx = op(x);
        const double lhs = (tx - fixed).squaredNorm() + rho * (x - tx).squaredNorm();
        acc.add((x - fixed).squaredNorm() - lhs);
    }
    return acc.report();
}

} // namespace regflow
