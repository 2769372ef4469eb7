#pragma once

#include <functional>
#include <span>

#include "netpgd/matrix.hpp"
#include "netpgd/measurements.hpp"

namespace netpgd {

// Checks that stay independent of the code paths they verify.

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences (L(w + h e_i) − L(w − h e_i)) / 2h for every coordinate.
Vector finite_diff_grad(const ScalarFunction& loss, std::span<const double> w, double h);

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t worst_coordinate = 0;
    double h = 0.0;
};

/// Per coordinate |a − n| / max(|a|, |n|, floor), where floor is
/// 1e-7 · max(1, ‖n‖∞) so coordinates that are zero in both agree.
GradCheckReport compare_gradients(std::span<const double> analytic, std::span<const double> numeric, double h);

/// ‖Aᵀ(Ax* ∘ (1 − sign(Ax*) ∘ sign(Ax_t)))‖, sign(0) = +1.
double phase_error_norm(const MeasurementOperator& op, std::span<const double> xstar, std::span<const double> xt);

/// ‖x⁰ − x^T‖ / ‖x^T‖
double delta_i_stat(std::span<const double> x0, std::span<const double> xT);

}  // namespace netpgd
