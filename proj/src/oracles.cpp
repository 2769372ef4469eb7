#include "netpgd/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace netpgd {

Vector finite_diff_grad(const ScalarFunction& loss, std::span<const double> w, double h) {
    require(h > 0.0, "finite_diff_grad: h must be positive");
    Vector probe(w.begin(), w.end());
    Vector grad(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + h;
        const double up = loss(probe);
        probe[i] = orig - h;
        const double down = loss(probe);
        probe[i] = orig;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

GradCheckReport compare_gradients(std::span<const double> analytic, std::span<const double> numeric, double h) {
    require(analytic.size() == numeric.size(), "compare_gradients: length mismatch");
    double scale = 1.0;
    for (double v : numeric) scale = std::max(scale, std::abs(v));
    const double floor = 1e-7 * scale;
    GradCheckReport report;
    report.h = h;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
        const double rel = std::abs(analytic[i] - numeric[i]) / denom;
        if (rel > report.max_relative_error) {
            report.max_relative_error = rel;
            report.worst_coordinate = i;
        }
    }
    return report;
}

double phase_error_norm(const MeasurementOperator& op, std::span<const double> xstar, std::span<const double> xt) {
    require(xstar.size() == xt.size(), "phase_error_norm: length mismatch");
    const Vector a_star = mat_vec(op.matrix, xstar);
    const Vector a_t = mat_vec(op.matrix, xt);
    Vector masked(a_star.size());
    for (std::size_t i = 0; i < masked.size(); ++i) {
        const double s_star = a_star[i] < 0.0 ? -1.0 : 1.0;
        const double s_t = a_t[i] < 0.0 ? -1.0 : 1.0;
        masked[i] = a_star[i] * (1.0 - s_star * s_t);
    }
    return norm2(mat_tvec(op.matrix, masked));
}

double delta_i_stat(std::span<const double> x0, std::span<const double> xT) {
    require(x0.size() == xT.size(), "delta_i_stat: length mismatch");
    const double denom = norm2(xT);
    require(denom > 0.0, "delta_i_stat: final estimate is zero");
    return std::sqrt(squared_distance(x0, xT)) / denom;
}

}  // namespace netpgd
