#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "netpgd/oracles.hpp"

using namespace netpgd;

TEST_SUITE("oracles") {

TEST_CASE("finite differences of simple functions") {
    const Vector c{1.5, -2.0, 0.25, 3.0};
    const Vector w{0.3, -0.7, 1.1, 2.0};
    const Vector lin = finite_diff_grad([&](std::span<const double> x) { return dot(c, x); }, w, 1e-3);
    CHECK(testutil::max_abs_diff(lin, c) < 1e-12);

    const Vector quad = finite_diff_grad([](std::span<const double> x) { return squared_norm(x); }, w, 1e-5);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(quad[i] - 2.0 * w[i]) < 1e-8);
    CHECK_THROWS_AS(finite_diff_grad([](std::span<const double>) { return 0.0; }, w, 0.0), Error);
}

TEST_CASE("compare_gradients") {
    const Vector a{1.0, 2.0, 0.0};
    const Vector b{1.0, 2.2, 0.0};
    const GradCheckReport r = compare_gradients(a, b, 1e-6);
    CHECK(r.worst_coordinate == 1);
    CHECK(r.max_relative_error == doctest::Approx(0.2 / 2.2));
    CHECK(compare_gradients(a, a, 1e-6).max_relative_error == 0.0);
}

TEST_CASE("phase error norm") {
    const MeasurementOperator op = make_operator(50, 80, 1);
    const Vector x = testutil::random_vector(80, 2);
    CHECK(phase_error_norm(op, x, x) == 0.0);

    Vector neg = x;
    for (double& v : neg) v = -v;
    // Every sign flips: ‖Aᵀ(2Ax)‖, except entries where Ax is exactly 0.
    const Vector atax = apply_adjoint(op, netpgd::apply(op, x));
    CHECK(phase_error_norm(op, x, neg) == doctest::Approx(2.0 * norm2(atax)).epsilon(1e-12));
}

TEST_CASE("delta_i") {
    const Vector x{1.0, -2.0, 2.0};
    CHECK(delta_i_stat(x, x) == 0.0);
    Vector twice = x;
    for (double& v : twice) v *= 2.0;
    CHECK(delta_i_stat(twice, x) == doctest::Approx(1.0));
    CHECK_THROWS_AS(delta_i_stat(x, Vector(3, 0.0)), Error);
}

}  // TEST_SUITE
