#pragma once

#include <cstdint>
#include <string>

#include "netpgd/decoder.hpp"
#include "netpgd/matrix.hpp"
#include "netpgd/rng.hpp"

namespace netpgd {

/// Dense Gaussian sensing matrix A (n x d), entries N(0, 1/n).
struct MeasurementOperator {
    DenseMatrix matrix;
    std::uint64_t seed = 0;

    std::size_t n() const noexcept { return matrix.rows(); }
    std::size_t d() const noexcept { return matrix.cols(); }

    /// Wraps an arbitrary matrix (tests, orthonormal operators).
    static MeasurementOperator from_matrix(DenseMatrix m, std::uint64_t seed = 0);
};

/// Draws A row by row from `rng`. Two operators built from equal seeds share
/// their leading rows up to the 1/sqrt(n) scale, which couples n-grids.
MeasurementOperator make_operator(std::size_t n, std::size_t d, SeededRng& rng);
MeasurementOperator make_operator(std::size_t n, std::size_t d, std::uint64_t seed);

/// Random n x d matrix with orthonormal rows (n <= d). For n = d this is an
/// exact isometry.
MeasurementOperator make_orthonormal_operator(std::size_t n, std::size_t d, std::uint64_t seed);

/// Ax
Vector apply(const MeasurementOperator& op, std::span<const double> x);
/// Aᵀr
Vector apply_adjoint(const MeasurementOperator& op, std::span<const double> r);
/// |Ax|
Vector apply_magnitude(const MeasurementOperator& op, std::span<const double> x);

enum class RecMode { Range, Difference };

std::string to_string(RecMode mode);
RecMode parse_rec_mode(const std::string& text);

struct RecOptions {
    double alpha = 0.5;
    std::size_t trials = 200;
    /// Vectors drawn per trial. A trial passes only when every vector in it
    /// satisfies the sandwich, since the condition is uniform over the set.
    std::size_t vectors_per_trial = 25;
    RecMode mode = RecMode::Difference;
};

/// Monte-Carlo evidence for the set-restricted eigenvalue condition
/// (1 - alpha)‖h‖² <= ‖Ah‖² <= (1 + alpha)‖h‖² over decoder outputs or their
/// differences. Random weight draws stand in for "all of the range", so this
/// can refute the condition but never certify it.
struct RecReport {
    double alpha = 0.0;
    std::size_t trials = 0;
    std::size_t vectors_per_trial = 0;
    double pass_rate = 0.0;         ///< fraction of trials whose vectors all pass
    double vector_pass_rate = 0.0;  ///< fraction of individual vectors that pass
    double min_ratio = 0.0;         ///< min ‖Ah‖²/‖h‖² seen
    double max_ratio = 0.0;
    std::size_t discarded = 0;  ///< draws with ‖h‖ < 1e-9, redrawn
};

/// Sandwich statistics of a fixed batch of vectors, one trial per vector.
RecReport rec_sandwich(const MeasurementOperator& op, const std::vector<Vector>& vectors, double alpha);

/// Trial t draws its weights from SeededRng::derive(seed, t), so reports for
/// different operators with the same seed see identical vectors.
RecReport rec_check(const MeasurementOperator& op, const DecoderSpec& spec, const LatentCode& latent,
                    const RecOptions& options, std::uint64_t seed);

/// Same check with a fresh n x d operator per trial. Operator and weight
/// streams depend only on (seed, trial), so runs at different n are coupled.
RecReport rec_check(std::size_t n, const DecoderSpec& spec, const LatentCode& latent, const RecOptions& options,
                    std::uint64_t seed, bool orthonormal = false);

}  // namespace netpgd
