#include "regflow/sampling.hpp"

#include <cmath>

namespace regflow {

BallSampler::BallSampler(Point center, double radius, std::uint64_t seed)
    : center_(std::move(center)), radius_(radius), rng_(seed) {
    if (!(radius_ > 0.0)) throw UsageError("BallSampler: radius must be positive");
    if (center_.size() == 0) throw UsageError("BallSampler: empty center");
}

Point BallSampler::next() {
    const auto n = center_.size();
    Point dir(n);
    double norm = 0.0;
    do {
        for (Eigen::Index i = 0; i < n; ++i) dir[i] = gauss_(rng_);
        norm = dir.norm();
    } while (norm == 0.0);
    const double r = radius_ * std::pow(unif_(rng_), 1.0 / static_cast<double>(n));
    return center_ + (r / norm) * dir;
}

std::vector<Point> BallSampler::draw(std::size_t count) {
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(next());
    return out;
}

} // namespace regflow
