#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace netpgd {

/// Raised for any violated precondition (shape mismatch, bad config, ...).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    DenseMatrix(std::size_t rows, std::size_t cols, Vector data);
    DenseMatrix(std::initializer_list<std::initializer_list<double>> init);

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const Vector& values() const noexcept { return data_; }

    DenseMatrix transposed() const;
    bool all_finite() const noexcept;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b);
/// aᵀ·b without materializing the transpose.
DenseMatrix mat_mul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// a·bᵀ without materializing the transpose.
DenseMatrix mat_mul_nt(const DenseMatrix& a, const DenseMatrix& b);

Vector mat_vec(const DenseMatrix& a, std::span<const double> x);
Vector mat_tvec(const DenseMatrix& a, std::span<const double> r);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double squared_norm(std::span<const double> a);
/// ‖a − b‖²
double squared_distance(std::span<const double> a, std::span<const double> b);

inline void require(bool cond, const std::string& what) {
    if (!cond) throw Error(what);
}

}  // namespace netpgd
