#include "netpgd/matrix.hpp"

#include <cmath>

namespace netpgd {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, Vector data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, "DenseMatrix: data length " + std::to_string(data_.size()) +
                                               " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : init) {
        require(r.size() == cols_, "DenseMatrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

bool DenseMatrix::all_finite() const noexcept {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.cols() == b.rows(), "mat_mul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                                      std::to_string(b.rows()) + ")");
    DenseMatrix out(a.rows(), b.cols());
    const std::size_t inner = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto dst = out.row(i);
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto src = b.row(k);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
        }
    }
    return out;
}

DenseMatrix mat_mul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.rows() == b.rows(), "mat_mul_tn: row counts differ");
    DenseMatrix out(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        auto brow = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = a(k, i);
            if (aki == 0.0) continue;
            auto dst = out.row(i);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aki * brow[j];
        }
    }
    return out;
}

DenseMatrix mat_mul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.cols() == b.cols(), "mat_mul_nt: column counts differ");
    DenseMatrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
    return out;
}

Vector mat_vec(const DenseMatrix& a, std::span<const double> x) {
    require(a.cols() == x.size(), "mat_vec: expected length " + std::to_string(a.cols()) + ", got " +
                                      std::to_string(x.size()));
    Vector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
    return y;
}

Vector mat_tvec(const DenseMatrix& a, std::span<const double> r) {
    require(a.rows() == r.size(), "mat_tvec: expected length " + std::to_string(a.rows()) + ", got " +
                                      std::to_string(r.size()));
    Vector x(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double ri = r[i];
        if (ri == 0.0) continue;
        auto arow = a.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += ri * arow[j];
    }
    return x;
}

double dot(std::span<const double> a, std::span<const double> b) {
    // Four accumulators let the compiler vectorize without -ffast-math while
    // keeping a fixed summation order.
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    std::size_t i = 0;
    const std::size_t n = a.size();
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "squared_distance: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace netpgd
