#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "netpgd/matrix.hpp"
#include "netpgd/rng.hpp"
#include "netpgd/transforms.hpp"

using namespace netpgd;
using testutil::max_abs_diff;

namespace {

DenseMatrix naive_product(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

}  // namespace

TEST_SUITE("numeric") {

TEST_CASE("mat_mul hand cases") {
    const DenseMatrix m{{1, 2}, {3, 4}};
    CHECK(mat_mul(DenseMatrix::identity(2), m) == m);
    const DenseMatrix v{{1}, {1}};
    CHECK(mat_mul(m, v) == DenseMatrix{{3}, {7}});
    CHECK_THROWS_AS(mat_mul(m, DenseMatrix(3, 1)), Error);
}

TEST_CASE("mat_mul against triple loop") {
    SeededRng rng(11);
    const DenseMatrix a = gaussian_sample(rng, 5, 4, 1.0);
    const DenseMatrix b = gaussian_sample(rng, 4, 3, 1.0);
    CHECK(max_abs_diff(mat_mul(a, b).data(), naive_product(a, b).data()) < 1e-12);
    CHECK(max_abs_diff(mat_mul_tn(a.transposed(), b).data(), naive_product(a, b).data()) < 1e-12);
    CHECK(max_abs_diff(mat_mul_nt(a, b.transposed()).data(), naive_product(a, b).data()) < 1e-12);
}

TEST_CASE("mat_mul associativity") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SeededRng rng(seed);
        const DenseMatrix a = gaussian_sample(rng, 6, 5, 1.0);
        const DenseMatrix b = gaussian_sample(rng, 5, 7, 1.0);
        const DenseMatrix c = gaussian_sample(rng, 7, 3, 1.0);
        const DenseMatrix left = mat_mul(mat_mul(a, b), c);
        const DenseMatrix right = mat_mul(a, mat_mul(b, c));
        double scale = 0.0;
        for (double v : left.data()) scale = std::max(scale, std::abs(v));
        CHECK(max_abs_diff(left.data(), right.data()) <= 1e-9 * scale);
    }
}

TEST_CASE("mat_vec and adjoint agree with products") {
    SeededRng rng(3);
    const DenseMatrix a = gaussian_sample(rng, 6, 9, 1.0);
    const Vector x = testutil::random_vector(9, 4);
    const Vector r = testutil::random_vector(6, 5);
    CHECK(std::abs(dot(mat_vec(a, x), r) - dot(x, mat_tvec(a, r))) < 1e-12);
    CHECK_THROWS_AS(mat_vec(a, r), Error);
}

TEST_CASE("DenseMatrix construction checks") {
    CHECK_THROWS_AS(DenseMatrix(2, 2, Vector{1, 2, 3}), Error);
    CHECK_THROWS_AS((DenseMatrix{{1, 2}, {3}}), Error);
    DenseMatrix m{{1, 2}, {3, 4}};
    CHECK(m.all_finite());
    m(0, 1) = std::nan("");
    CHECK_FALSE(m.all_finite());
    CHECK(DenseMatrix{{1, 2}, {3, 4}}.transposed() == DenseMatrix{{1, 3}, {2, 4}});
}

TEST_CASE("rng determinism and streams") {
    SeededRng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs = differs || x != c.next_u64();
    }
    CHECK(differs);
    SeededRng d0 = SeededRng::derive(5, 0), d0b = SeededRng::derive(5, 0), d1 = SeededRng::derive(5, 1);
    const auto v0 = d0.next_u64();
    CHECK(v0 == d0b.next_u64());
    CHECK(v0 != d1.next_u64());
    // Frozen first output for seed 0 pins the generator across platforms.
    SeededRng z(0);
    CHECK(z.next_u64() == 0x99ec5f36cb75f2b4ULL);
}

TEST_CASE("uniform range") {
    SeededRng rng(9);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("gaussian_sample moments") {
    SeededRng rng(2024);
    const DenseMatrix g = gaussian_sample(rng, 1000, 100, 1.0);
    double mean = 0.0;
    for (double v : g.data()) mean += v;
    mean /= static_cast<double>(g.size());
    double var = 0.0;
    for (double v : g.data()) var += (v - mean) * (v - mean);
    var /= static_cast<double>(g.size() - 1);
    CHECK(std::abs(mean) < 3.0 / std::sqrt(1e5));
    CHECK(var >= 0.98);
    CHECK(var <= 1.02);

    SeededRng r1(1), r2(1);
    CHECK(gaussian_sample(r1, 7, 3, 0.5) == gaussian_sample(r2, 7, 3, 0.5));
    CHECK(gaussian_sample(r1, 0, 5, 1.0).empty());
    CHECK_THROWS_AS(gaussian_sample(r1, 2, 2, 0.0), Error);
}

TEST_CASE("upsample constant and hand column") {
    const DenseMatrix c(3, 5, 0.7);
    const DenseMatrix up = bilinear_upsample_2d(c);
    CHECK(up.rows() == 6);
    CHECK(up.cols() == 10);
    for (double v : up.data()) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));

    const DenseMatrix col{{2}, {0}};
    const DenseMatrix out = bilinear_upsample_2d(col);
    REQUIRE(out.rows() == 4);
    REQUIRE(out.cols() == 2);
    // Both columns equal the 1-D doubling [2, 1, 0, 0] (width 1 clamps).
    for (std::size_t c2 = 0; c2 < 2; ++c2) {
        CHECK(out(0, c2) == 2.0);
        CHECK(out(1, c2) == 1.0);
        CHECK(out(2, c2) == 0.0);
        CHECK(out(3, c2) == 0.0);
    }
}

TEST_CASE("upsample linearity and operator shape") {
    SeededRng rng(5);
    const DenseMatrix x = gaussian_sample(rng, 4, 3, 1.0);
    const DenseMatrix y = gaussian_sample(rng, 4, 3, 1.0);
    const double alpha = 1.7, beta = -0.4;
    DenseMatrix comb(4, 3);
    for (std::size_t i = 0; i < comb.size(); ++i) comb.data()[i] = alpha * x.data()[i] + beta * y.data()[i];
    const DenseMatrix lhs = bilinear_upsample_2d(comb);
    const DenseMatrix ux = bilinear_upsample_2d(x), uy = bilinear_upsample_2d(y);
    for (std::size_t i = 0; i < lhs.size(); ++i)
        CHECK(lhs.data()[i] == doctest::Approx(alpha * ux.data()[i] + beta * uy.data()[i]).epsilon(1e-12));

    const GridShape shape{3, 4};
    const DenseMatrix u = upsample_matrix(shape);
    CHECK(u.rows() == 48);
    CHECK(u.cols() == 12);
    for (std::size_t r = 0; r < u.rows(); ++r) {
        double sum = 0.0;
        for (double v : u.row(r)) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    }
    // Materialized matrix reproduces the implicit operator.
    const DenseMatrix flat(12, 1, x.values());
    const DenseMatrix grid_x = DenseMatrix(3, 4, Vector(x.values().begin(), x.values().begin() + 12));
    CHECK(max_abs_diff(mat_mul(u, flat).data(), bilinear_upsample_2d(grid_x).data()) < 1e-15);
}

TEST_CASE("upsample adjoint is the transpose") {
    const GridShape shape{3, 5};
    SeededRng rng(8);
    const DenseMatrix g = gaussian_sample(rng, shape.pixels(), 2, 1.0);
    const DenseMatrix h = gaussian_sample(rng, 4 * shape.pixels(), 2, 1.0);
    const DenseMatrix ug = upsample_channels(g, shape);
    const DenseMatrix uth = upsample_channels_adjoint(h, shape);
    CHECK(dot(ug.data(), h.data()) == doctest::Approx(dot(g.data(), uth.data())).epsilon(1e-12));
    CHECK_THROWS_AS(upsample_channels(g, GridShape{2, 2}), Error);
}

TEST_CASE("dct basis") {
    CHECK(dct2_basis(1) == DenseMatrix{{1.0}});
    for (std::size_t side : {2u, 5u, 8u, 16u}) {
        const DenseMatrix d = dct2_basis(side);
        const DenseMatrix dtd = mat_mul_tn(d, d);
        double worst = 0.0;
        for (std::size_t i = 0; i < dtd.rows(); ++i)
            for (std::size_t j = 0; j < dtd.cols(); ++j)
                worst = std::max(worst, std::abs(dtd(i, j) - (i == j ? 1.0 : 0.0)));
        CHECK(worst < 1e-10);
    }
    const DenseMatrix d8 = dct2_basis(8);
    const Vector v = testutil::random_vector(64, 3);
    CHECK(norm2(mat_vec(d8, v)) == doctest::Approx(norm2(v)).epsilon(1e-10));
    Vector impulse(64, 0.0);
    impulse[0] = 1.0;
    for (double px : mat_vec(d8, impulse)) CHECK(px == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
    CHECK_THROWS_AS(dct2_basis(0), Error);
}

}  // TEST_SUITE
