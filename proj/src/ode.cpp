#include "regflow/ode.hpp"

#include <algorithm>
#include <cmath>

namespace regflow::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

double scaled_norm(const Point& err, const Point& y0, const Point& y1, const AdaptiveOptions& o) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = o.abs_tol + o.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
}

double initial_step(const Rhs& f, double t0, const Point& y, const Point& k1, const AdaptiveOptions& o,
                    double span) {
    Point scale = (o.abs_tol + o.rel_tol * y.array().abs()).matrix();
    const double d0 = std::sqrt((y.array() / scale.array()).square().mean());
    const double d1 = std::sqrt((k1.array() / scale.array()).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const Point y1 = y + h0 * k1;
    const Point k2 = f(t0 + h0, y1);
    const double d2 = std::sqrt(((k2 - k1).array() / scale.array()).square().mean()) / h0;
    const double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                    : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    return std::min({100.0 * h0, h1, span});
}

} // namespace

Point dormand_prince(const Rhs& f, double t0, Point y, std::span<const double> stops, const AdaptiveOptions& opts,
                     const Observer& observe, AdaptiveStats& stats) {
    if (stops.empty()) return y;
    if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0)) throw UsageError("dormand_prince: tolerances must be positive");

    double t = t0;
    Point k1 = f(t, y);
    double h = opts.initial_step > 0.0 ? opts.initial_step : initial_step(f, t, y, k1, opts, stops.back() - t0);

    for (double stop : stops) {
        while (t < stop) {
            bool last = false;
            double step = h;
            if (t + step >= stop || stop - (t + step) < 1e-12 * std::max(1.0, std::abs(stop))) {
                step = stop - t;
                last = true;
            }
            if (step < opts.min_step && !last) {
                throw StepSizeUnderflow("dormand_prince: step size fell below " + std::to_string(opts.min_step), t);
            }

            const Point k2 = f(t + c2 * step, y + step * (a21 * k1));
            const Point k3 = f(t + c3 * step, y + step * (a31 * k1 + a32 * k2));
            const Point k4 = f(t + c4 * step, y + step * (a41 * k1 + a42 * k2 + a43 * k3));
            const Point k5 = f(t + c5 * step, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const Point k6 = f(t + step, y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            Point y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const double t_new = last ? stop : t + step;
            const Point k7 = f(t_new, y_new);
            const Point err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            const double en = scaled_norm(err, y, y_new, opts);
            if (!std::isfinite(en)) throw NumericError("dormand_prince: non-finite error estimate");
            if (en <= 1.0) {
                t = t_new;
                y = std::move(y_new);
                k1 = k7;
                ++stats.accepted;
                stats.max_error_norm = std::max(stats.max_error_norm, en);
                stats.max_local_error = std::max(stats.max_local_error, err.cwiseAbs().maxCoeff());
                stats.last_step = step;
                const double grow = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
                // A step shortened to hit a stop says nothing about the admissible size.
                h = last ? std::max(h, step * grow) : step * grow;
            } else {
                ++stats.rejected;
                h = step * std::clamp(0.9 * std::pow(en, -0.2), 0.1, 1.0);
                if (h < opts.min_step) {
                    throw StepSizeUnderflow("dormand_prince: step size fell below " + std::to_string(opts.min_step), t);
                }
            }
        }
        observe(t, y);
    }
    return y;
}

Point rk4_step(const Rhs& f, double t, const Point& y, double h) {
    const Point k1 = f(t, y);
    const Point k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
    const Point k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
    const Point k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Point euler_step(const Rhs& f, double t, const Point& y, double h) { return y + h * f(t, y); }

} // namespace regflow::ode
