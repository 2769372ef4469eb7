#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "netpgd/matrix.hpp"
#include "netpgd/rng.hpp"
#include "netpgd/transforms.hpp"

namespace netpgd {

/// Architecture of the untrained decoder.
///
/// `channels` lists k_1 ... k_L followed by the output channel count, so a
/// decoder with L weight layers has L + 1 entries and W_l is
/// channels[l-1] x channels[l]. The latent grid is latent_side x latent_side
/// and is bilinearly doubled between consecutive weight layers, giving an
/// output side of latent_side * 2^(L-1).
struct DecoderSpec {
    std::vector<std::size_t> channels;
    std::size_t latent_side = 0;
    bool channel_norm = true;
    bool output_sigmoid = true;

    std::size_t num_layers() const noexcept { return channels.empty() ? 0 : channels.size() - 1; }
    std::size_t output_channels() const noexcept { return channels.empty() ? 0 : channels.back(); }
    std::size_t output_side() const noexcept;
    /// Pixels of the output grid.
    std::size_t output_pixels() const noexcept { return output_side() * output_side(); }
    /// Length of the vectorized output, pixels x output channels.
    std::size_t output_dim() const noexcept { return output_pixels() * output_channels(); }
    std::size_t latent_pixels() const noexcept { return latent_side * latent_side; }
    std::size_t parameter_count() const noexcept;
    GridShape grid_at(std::size_t layer) const noexcept;

    /// Throws Error unless L >= 2, every channel count is positive and the
    /// network has fewer weights than output entries.
    void validate() const;

    /// key=value text with keys layers, channels, latent_side, channel_norm,
    /// sigmoid. `layers` is optional but must agree with `channels` if given.
    static DecoderSpec parse(std::string_view text);
    static DecoderSpec load(const std::string& path);
    std::string to_string() const;

    /// 28x28 configuration: k = 15, 15, 10 and a single output map.
    static DecoderSpec mnist();

    friend bool operator==(const DecoderSpec&, const DecoderSpec&) = default;
};

/// Fixed random input Z_1 (latent_pixels x k_1), Uniform[0, 1).
struct LatentCode {
    DenseMatrix z;
    std::uint64_t seed = 0;
};

LatentCode make_latent(const DecoderSpec& spec, std::uint64_t seed);

/// W_1 ... W_L.
struct DecoderWeights {
    std::vector<DenseMatrix> layers;

    std::size_t parameter_count() const noexcept;
    Vector flatten() const;
    void assign_flat(std::span<const double> flat);
    /// Same shapes, all zeros.
    DecoderWeights zeros_like() const;
    bool all_finite() const noexcept;

    friend bool operator==(const DecoderWeights&, const DecoderWeights&) = default;
};

DecoderWeights init_weights(const DecoderSpec& spec, SeededRng& rng);
void check_weights(const DecoderSpec& spec, const DecoderWeights& weights);

/// Intermediate values of one forward pass, enough to replay the output and
/// to run the reverse pass.
struct ForwardTape {
    struct Layer {
        DenseMatrix input;        ///< Z_l
        DenseMatrix pre;          ///< Z_l W_l
        DenseMatrix activation;   ///< ReLU(Z_l W_l), normalized when channel_norm is on
        Vector mean;              ///< per-channel statistics (channel_norm only)
        Vector inv_std;
    };
    std::vector<Layer> hidden;  ///< layers 1 .. L-1
    DenseMatrix last_input;     ///< Z_L
    Vector output;              ///< x, row-major pixels x output channels
};

struct ForwardResult {
    Vector image;
    ForwardTape tape;
};

ForwardResult forward(const DecoderSpec& spec, const DecoderWeights& weights, const LatentCode& latent);
/// Output only, skipping tape bookkeeping.
Vector generate(const DecoderSpec& spec, const DecoderWeights& weights, const LatentCode& latent);

/// Gradient of <upstream, G(w; z)> with respect to every W_l, using a tape
/// recorded for the same weights.
DecoderWeights backward(const DecoderSpec& spec, const DecoderWeights& weights, const ForwardTape& tape,
                        std::span<const double> upstream);
DecoderWeights grad_weights(const DecoderSpec& spec, const DecoderWeights& weights, const LatentCode& latent,
                            std::span<const double> upstream);

enum class OptimizerKind { Adam, Momentum };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& text);

/// First-order update rule on a flat parameter vector. Adam uses
/// beta1 = momentum, beta2 = 0.999, eps = 1e-8; Momentum is heavy-ball
/// v <- momentum * v + g, w <- w - lr * v.
class GradientStepper {
public:
    GradientStepper(OptimizerKind kind, std::size_t size, double lr, double momentum);
    void step(std::span<double> params, std::span<const double> grad);

private:
    OptimizerKind kind_;
    double lr_;
    double momentum_;
    std::size_t count_ = 0;
    Vector first_;
    Vector second_;
};

/// Settings of the inner weight-fitting loop used by projection and Net-GD.
struct ProjectionOptions {
    std::size_t inner_iters = 200;
    double inner_lr = 0.01;
    double momentum = 0.9;
    OptimizerKind optimizer = OptimizerKind::Adam;
};

/// Loss blew up past 1e6 x its starting value.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t iteration) : Error(what), iteration_(iteration) {}
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

struct ProjectionResult {
    DecoderWeights weights;  ///< best weights seen
    double fit_loss = 0.0;   ///< ‖target − G(weights; z)‖²
    std::size_t best_iter = 0;
    double initial_loss = 0.0;
};

/// Fits weights so that G(w; z) approximates `target`, starting from
/// `warm_start`. Returns the lowest-loss iterate, so the result never fits
/// worse than the warm start.
ProjectionResult project(const DecoderSpec& spec, const LatentCode& latent, std::span<const double> target,
                         const DecoderWeights& warm_start, const ProjectionOptions& options);

/// Same, continuing from a caller-owned optimizer state (moment estimates
/// carried over from earlier projections of nearby targets).
ProjectionResult project(const DecoderSpec& spec, const LatentCode& latent, std::span<const double> target,
                         const DecoderWeights& warm_start, const ProjectionOptions& options,
                         GradientStepper& stepper);

}  // namespace netpgd
