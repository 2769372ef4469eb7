#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "netpgd/decoder.hpp"
#include "netpgd/measurements.hpp"

namespace netpgd {

/// Settings shared by the network-prior solvers.
struct SolverConfig {
    double eta = 0.4;                 ///< outer gradient step
    std::size_t max_outer_iters = 300;
    double tol = 1e-6;                ///< stop once ‖y − f(x)‖ / ‖y‖ < tol
    std::size_t inner_iters = 50;     ///< projection steps (Net-GD: steps per trace record)
    double inner_lr = 0.002;
    double momentum = 0.9;
    OptimizerKind optimizer = OptimizerKind::Adam;
    bool carry_optimizer = false;     ///< keep optimizer moments across outer iterations
    std::uint64_t seed = 0;           ///< weight initialization when no w0 is given

    ProjectionOptions projection() const { return {inner_iters, inner_lr, momentum, optimizer}; }
    void validate() const;

    static SolverConfig cs_defaults();
    static SolverConfig cpr_defaults();
};

/// Ground truth used only for reporting; never read by the updates.
struct Reference {
    std::span<const double> image;
    bool sign_resolve = false;
};

struct IterationRecord {
    std::size_t t = 0;
    double measurement_loss = 0.0;  ///< ‖y − f(x^t)‖²
    double fit_loss = std::numeric_limits<double>::quiet_NaN();     ///< projection loss that produced x^t
    double nmse = std::numeric_limits<double>::quiet_NaN();
    double phase_error = std::numeric_limits<double>::quiet_NaN();  ///< ‖ε_p^t‖, CPR with reference only
    double step_size = 0.0;
};

struct SolverTrace {
    std::vector<IterationRecord> records;
    Vector initial_image;  ///< x^0
    Vector image;          ///< final estimate
    DecoderWeights weights;
    bool converged = false;  ///< stopped on the residual tolerance

    std::size_t iterations() const noexcept { return records.empty() ? 0 : records.back().t; }
    double final_loss() const noexcept { return records.empty() ? 0.0 : records.back().measurement_loss; }
};

enum class MeasurementMode { Linear, Magnitude };

/// Projected gradient descent with the decoder range as constraint set,
/// linear measurements y = Ax.
SolverTrace net_pgd_cs(std::span<const double> y, const MeasurementOperator& op, const DecoderSpec& spec,
                       const LatentCode& latent, const SolverConfig& cfg,
                       const std::optional<DecoderWeights>& w0 = std::nullopt,
                       const std::optional<Reference>& reference = std::nullopt);

/// Projected gradient descent for magnitude-only measurements y = |Ax|,
/// re-estimating the signs of Ax every iteration.
SolverTrace net_pgd_cpr(std::span<const double> y, const MeasurementOperator& op, const DecoderSpec& spec,
                        const LatentCode& latent, const SolverConfig& cfg,
                        const std::optional<DecoderWeights>& w0 = std::nullopt,
                        const std::optional<Reference>& reference = std::nullopt);

/// Momentum gradient descent directly on the weights of ‖y − f(G(w; z))‖².
SolverTrace net_gd(std::span<const double> y, const MeasurementOperator& op, MeasurementMode mode,
                   const DecoderSpec& spec, const LatentCode& latent, const SolverConfig& cfg,
                   const std::optional<DecoderWeights>& w0 = std::nullopt,
                   const std::optional<Reference>& reference = std::nullopt);

struct IstaResult {
    Vector image;
    Vector coefficients;
    std::vector<double> objective;  ///< ‖y − ADc‖² + λ‖c‖₁, entry 0 at c = 0
    double step = 0.0;
};

/// ISTA on the DCT-sparse Lasso. The image must be square.
IstaResult ista_dct(std::span<const double> y, const MeasurementOperator& op, double lambda, std::size_t iters);

/// Lasso weight matching a solver that minimizes (1/2n)‖y − Xc‖² + alpha‖c‖₁.
double lasso_lambda_from_alpha(double alpha, std::size_t n);

/// ‖x̂ − x*‖² / ‖x*‖², optionally minimized over the global sign of x̂.
double nmse(std::span<const double> xhat, std::span<const double> xstar, bool sign_resolve);

/// sign with sign(0) = +1.
inline double sign_of(double v) noexcept { return v < 0.0 ? -1.0 : 1.0; }

}  // namespace netpgd
