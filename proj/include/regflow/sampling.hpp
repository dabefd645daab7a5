#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "regflow/point.hpp"

namespace regflow {

/// Uniform samples from the ball B(center, radius): Gaussian direction, radius * U^(1/n).
/// The same seed yields the same sequence, and samples for different radii are scaled copies.
class BallSampler {
public:
    BallSampler(Point center, double radius, std::uint64_t seed);

    Point next();
    std::vector<Point> draw(std::size_t count);

private:
    Point center_;
    double radius_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

} // namespace regflow
