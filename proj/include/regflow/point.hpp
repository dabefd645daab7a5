#pragma once

#include <Eigen/Core>

#include <cmath>
#include <initializer_list>
#include <string>

#include "regflow/errors.hpp"

namespace regflow {

/// A state vector in R^n.
using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline Point make_point(std::initializer_list<double> coords) {
    Point p(static_cast<Eigen::Index>(coords.size()));
    Eigen::Index i = 0;
    for (double c : coords) p[i++] = c;
    return p;
}

inline bool all_finite(const Point& x) { return x.allFinite(); }

inline void require_dim(const Point& x, Eigen::Index dim, const char* what) {
    if (x.size() != dim) {
        throw UsageError(std::string(what) + ": dimension mismatch (got " + std::to_string(x.size()) +
                         ", expected " + std::to_string(dim) + ")");
    }
}

} // namespace regflow
