#include "netpgd/transforms.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace netpgd {

namespace {

struct Tap {
    std::array<std::size_t, 2> index;
    std::array<double, 2> weight;
};

std::vector<Tap> doubling_taps(std::size_t m) {
    std::vector<Tap> taps(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        taps[2 * i] = {{i, i}, {1.0, 0.0}};
        if (i + 1 < m)
            taps[2 * i + 1] = {{i, i + 1}, {0.5, 0.5}};
        else
            taps[2 * i + 1] = {{i, i}, {1.0, 0.0}};
    }
    return taps;
}

}  // namespace

DenseMatrix upsample_channels(const DenseMatrix& grid, GridShape shape) {
    require(shape.height >= 1 && shape.width >= 1, "upsample: empty grid");
    require(grid.rows() == shape.pixels(), "upsample: grid has " + std::to_string(grid.rows()) +
                                               " rows, shape expects " + std::to_string(shape.pixels()));
    const auto ty = doubling_taps(shape.height);
    const auto tx = doubling_taps(shape.width);
    const std::size_t out_w = 2 * shape.width;
    const std::size_t channels = grid.cols();
    DenseMatrix out(4 * shape.pixels(), channels);
    for (std::size_t oy = 0; oy < ty.size(); ++oy) {
        for (std::size_t ox = 0; ox < tx.size(); ++ox) {
            auto dst = out.row(oy * out_w + ox);
            for (int p = 0; p < 2; ++p) {
                const double wy = ty[oy].weight[p];
                if (wy == 0.0) continue;
                for (int q = 0; q < 2; ++q) {
                    const double w = wy * tx[ox].weight[q];
                    if (w == 0.0) continue;
                    auto src = grid.row(ty[oy].index[p] * shape.width + tx[ox].index[q]);
                    for (std::size_t c = 0; c < channels; ++c) dst[c] += w * src[c];
                }
            }
        }
    }
    return out;
}

DenseMatrix upsample_channels_adjoint(const DenseMatrix& grad, GridShape shape) {
    require(shape.height >= 1 && shape.width >= 1, "upsample adjoint: empty grid");
    require(grad.rows() == 4 * shape.pixels(), "upsample adjoint: gradient row count mismatch");
    const auto ty = doubling_taps(shape.height);
    const auto tx = doubling_taps(shape.width);
    const std::size_t out_w = 2 * shape.width;
    const std::size_t channels = grad.cols();
    DenseMatrix out(shape.pixels(), channels);
    for (std::size_t oy = 0; oy < ty.size(); ++oy) {
        for (std::size_t ox = 0; ox < tx.size(); ++ox) {
            auto src = grad.row(oy * out_w + ox);
            for (int p = 0; p < 2; ++p) {
                const double wy = ty[oy].weight[p];
                if (wy == 0.0) continue;
                for (int q = 0; q < 2; ++q) {
                    const double w = wy * tx[ox].weight[q];
                    if (w == 0.0) continue;
                    auto dst = out.row(ty[oy].index[p] * shape.width + tx[ox].index[q]);
                    for (std::size_t c = 0; c < channels; ++c) dst[c] += w * src[c];
                }
            }
        }
    }
    return out;
}

DenseMatrix bilinear_upsample_2d(const DenseMatrix& img) {
    const GridShape shape{img.rows(), img.cols()};
    DenseMatrix flat(shape.pixels(), 1, img.values());
    DenseMatrix up = upsample_channels(flat, shape);
    return DenseMatrix(2 * shape.height, 2 * shape.width, up.values());
}

DenseMatrix upsample_matrix(GridShape shape) {
    return upsample_channels(DenseMatrix::identity(shape.pixels()), shape);
}

DenseMatrix dct2_basis(std::size_t side) {
    require(side >= 1, "dct2_basis: side must be >= 1");
    // 1-D synthesis matrix: c1[n][k] = s_k cos(pi (2n+1) k / 2N).
    DenseMatrix c1(side, side);
    const double n_f = static_cast<double>(side);
    for (std::size_t n = 0; n < side; ++n) {
        for (std::size_t k = 0; k < side; ++k) {
            const double scale = k == 0 ? std::sqrt(1.0 / n_f) : std::sqrt(2.0 / n_f);
            c1(n, k) = scale * std::cos(std::numbers::pi * (2.0 * n + 1.0) * k / (2.0 * n_f));
        }
    }
    const std::size_t d = side * side;
    DenseMatrix basis(d, d);
    for (std::size_t y = 0; y < side; ++y)
        for (std::size_t x = 0; x < side; ++x)
            for (std::size_t ky = 0; ky < side; ++ky)
                for (std::size_t kx = 0; kx < side; ++kx)
                    basis(y * side + x, ky * side + kx) = c1(y, ky) * c1(x, kx);
    return basis;
}

}  // namespace netpgd
