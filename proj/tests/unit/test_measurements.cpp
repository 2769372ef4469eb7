#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "netpgd/measurements.hpp"

using namespace netpgd;

TEST_SUITE("measurements") {

TEST_CASE("operator scale and determinism") {
    const MeasurementOperator a = make_operator(100, 100, 7);
    CHECK(a.n() == 100);
    CHECK(a.d() == 100);
    CHECK(make_operator(100, 100, 7).matrix == a.matrix);
    double mean_col = 0.0;
    for (std::size_t c = 0; c < a.d(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < a.n(); ++r) s += a.matrix(r, c) * a.matrix(r, c);
        mean_col += std::sqrt(s);
    }
    mean_col /= static_cast<double>(a.d());
    CHECK(mean_col == doctest::Approx(1.0).epsilon(0.05));
    CHECK_THROWS_AS(make_operator(0, 5, 1), Error);
}

TEST_CASE("operators from one stream share leading rows") {
    SeededRng r1(3), r2(3);
    const MeasurementOperator small = make_operator(20, 50, r1);
    const MeasurementOperator big = make_operator(40, 50, r2);
    const double rescale = std::sqrt(40.0 / 20.0);
    for (std::size_t r = 0; r < 20; ++r)
        for (std::size_t c = 0; c < 50; ++c)
            CHECK(small.matrix(r, c) == doctest::Approx(big.matrix(r, c) * rescale).epsilon(1e-14));
}

TEST_CASE("apply, adjoint, magnitude") {
    const MeasurementOperator op = make_operator(30, 60, 2);
    CHECK(netpgd::apply(op, Vector(60, 0.0)) == Vector(30, 0.0));
    const Vector x = testutil::random_vector(60, 3);
    const Vector r = testutil::random_vector(30, 4);
    CHECK(std::abs(dot(netpgd::apply(op, x), r) - dot(x, apply_adjoint(op, r))) < 1e-10);

    Vector neg = x;
    for (double& v : neg) v = -v;
    CHECK(apply_magnitude(op, neg) == apply_magnitude(op, x));
    const Vector ax = netpgd::apply(op, x);
    const Vector mag = apply_magnitude(op, x);
    for (std::size_t i = 0; i < ax.size(); ++i) CHECK(mag[i] == std::abs(ax[i]));
    CHECK(apply_magnitude(op, Vector(60, 0.0)) == Vector(30, 0.0));

    CHECK_THROWS_AS(netpgd::apply(op, Vector(59, 0.0)), Error);
    CHECK_THROWS_AS(apply_adjoint(op, Vector(60, 0.0)), Error);
}

TEST_CASE("identity block truncates") {
    DenseMatrix m(3, 5);
    for (std::size_t i = 0; i < 3; ++i) m(i, i) = 1.0;
    const MeasurementOperator op = MeasurementOperator::from_matrix(m);
    CHECK(netpgd::apply(op, Vector{1, 2, 3, 4, 5}) == Vector{1, 2, 3});
}

TEST_CASE("orthonormal operator") {
    const MeasurementOperator q = make_orthonormal_operator(40, 40, 5);
    const DenseMatrix qqt = mat_mul_nt(q.matrix, q.matrix);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 40; ++j) CHECK(qqt(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    CHECK_THROWS_AS(make_orthonormal_operator(41, 40, 5), Error);
}

TEST_CASE("normalized ratio is unbiased") {
    const Vector h = testutil::random_vector(200, 9);
    const double hh = squared_norm(h);
    double mean = 0.0;
    const int draws = 200;
    for (int t = 0; t < draws; ++t) {
        const MeasurementOperator op = make_operator(100, 200, static_cast<std::uint64_t>(t));
        mean += squared_norm(netpgd::apply(op, h)) / hh;
    }
    mean /= draws;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("rec check edge cases") {
    const DecoderSpec spec{{15, 15, 1}, 14, false, false};
    const LatentCode latent = make_latent(spec, 0);
    RecOptions opt;
    opt.trials = 20;
    opt.vectors_per_trial = 5;

    const MeasurementOperator iso = make_orthonormal_operator(784, 784, 1);
    for (double alpha : {0.01, 0.5}) {
        opt.alpha = alpha;
        const RecReport r = rec_check(iso, spec, latent, opt, 3);
        CHECK(r.pass_rate == 1.0);
        CHECK(r.min_ratio == doctest::Approx(1.0).epsilon(1e-9));
    }
    opt.alpha = 0.1;
    const RecReport one = rec_check(make_operator(1, 784, 2), spec, latent, opt, 3);
    CHECK(one.pass_rate <= 0.1);
    CHECK(one.min_ratio <= one.max_ratio);
    CHECK(one.pass_rate >= 0.0);

    const DecoderSpec sig{{15, 15, 1}, 14, false, true};
    CHECK_THROWS_AS(rec_check(iso, sig, latent, opt, 0), Error);
    opt.alpha = 1.5;
    CHECK_THROWS_AS(rec_check(iso, spec, latent, opt, 0), Error);
    opt.alpha = 0.5;
    opt.trials = 0;
    CHECK_THROWS_AS(rec_check(iso, spec, latent, opt, 0), Error);
}

TEST_CASE("rec pass rate grows with n on coupled draws") {
    const DecoderSpec spec{{15, 15, 1}, 14, false, false};
    const LatentCode latent = make_latent(spec, 0);
    RecOptions opt;
    opt.trials = 40;
    double prev = -1.0;
    for (std::size_t n : {20u, 50u, 100u, 200u, 400u}) {
        const RecReport r = rec_check(n, spec, latent, opt, 11);
        CHECK(r.pass_rate >= prev);
        prev = r.pass_rate;
    }
    CHECK(prev == 1.0);
}

TEST_CASE("difference and range modes on the same operator") {
    const DecoderSpec spec{{15, 15, 1}, 14, false, false};
    const LatentCode latent = make_latent(spec, 0);
    RecOptions opt;
    opt.trials = 50;
    opt.vectors_per_trial = 1;
    opt.mode = RecMode::Difference;
    const RecReport diff = rec_check(400, spec, latent, opt, 4);
    opt.mode = RecMode::Range;
    const RecReport range = rec_check(400, spec, latent, opt, 4);
    // Range vectors are differences with the zero network, so a passing
    // difference check at this n should carry over.
    CHECK(diff.pass_rate == 1.0);
    CHECK(range.pass_rate == 1.0);
}

TEST_CASE("rec_sandwich skips degenerate vectors") {
    const MeasurementOperator iso = make_orthonormal_operator(10, 10, 1);
    std::vector<Vector> vs{Vector(10, 0.0), testutil::random_vector(10, 1)};
    const RecReport r = rec_sandwich(iso, vs, 0.2);
    CHECK(r.discarded == 1);
    CHECK(r.trials == 1);
    CHECK(r.pass_rate == 1.0);
    CHECK_THROWS_AS(rec_sandwich(iso, {Vector(10, 0.0)}, 0.2), Error);
}

TEST_CASE("rec mode names") {
    CHECK(parse_rec_mode("range") == RecMode::Range);
    CHECK(parse_rec_mode(to_string(RecMode::Difference)) == RecMode::Difference);
    CHECK_THROWS_AS(parse_rec_mode("sideways"), Error);
}

}  // TEST_SUITE
