#pragma once

#include <span>

namespace regflow {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Residual sum of squares.
    double rss = 0.0;
};

/// Ordinary least squares y ~ intercept + slope * x. Needs at least two distinct x values.
[[nodiscard]] LineFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace regflow
