#pragma once

#include <cstddef>

#include "netpgd/matrix.hpp"

namespace netpgd {

/// Spatial extent of a row-major flattened grid.
struct GridShape {
    std::size_t height = 0;
    std::size_t width = 0;

    std::size_t pixels() const noexcept { return height * width; }
    GridShape doubled() const noexcept { return {2 * height, 2 * width}; }
    friend bool operator==(const GridShape&, const GridShape&) = default;
};

// Bilinear doubling. Along each axis out[2i] = in[i] and
// out[2i+1] = (in[i] + in[i+1]) / 2, with the last odd sample clamped to
// in[m-1]. Separable, linear, rows of the operator sum to one.

/// Single-channel image (h x w matrix) -> (2h x 2w).
DenseMatrix bilinear_upsample_2d(const DenseMatrix& img);

/// Multi-channel grid: rows are pixels of `shape` (row-major), columns are
/// channels. Returns a (4 * pixels) x channels matrix.
DenseMatrix upsample_channels(const DenseMatrix& grid, GridShape shape);

/// Exact transpose of upsample_channels; `grad` has 4 * shape.pixels() rows.
DenseMatrix upsample_channels_adjoint(const DenseMatrix& grad, GridShape shape);

/// The doubling operator U for a grid, materialized as (4hw) x (hw).
DenseMatrix upsample_matrix(GridShape shape);

/// Orthonormal 2-D DCT-II synthesis basis, side² x side². Column k1*side+k2
/// is the separable basis image for frequencies (k1, k2), flattened
/// row-major, so x = D c and c = Dᵀ x.
DenseMatrix dct2_basis(std::size_t side);

}  // namespace netpgd
