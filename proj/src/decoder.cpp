#include "netpgd/decoder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace netpgd {

namespace {

constexpr double kNormEps = 1e-6;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    std::size_t out = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw Error("decoder spec: bad integer for '" + key + "': " + value);
    return out;
}

bool parse_flag(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "off" || value == "no") return false;
    throw Error("decoder spec: bad flag for '" + key + "': " + value);
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void relu_inplace(DenseMatrix& m) {
    for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
}

// Standardize every column over its rows; writes statistics when given.
void normalize_channels(DenseMatrix& m, Vector* mean_out, Vector* inv_std_out) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    Vector mean(cols, 0.0), var(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        auto row = m.row(r);
        for (std::size_t c = 0; c < cols; ++c) mean[c] += row[c];
    }
    for (double& v : mean) v /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        auto row = m.row(r);
        for (std::size_t c = 0; c < cols; ++c) {
            const double dv = row[c] - mean[c];
            var[c] += dv * dv;
        }
    }
    Vector inv_std(cols);
    for (std::size_t c = 0; c < cols; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] / static_cast<double>(rows) + kNormEps);
    for (std::size_t r = 0; r < rows; ++r) {
        auto row = m.row(r);
        for (std::size_t c = 0; c < cols; ++c) row[c] = (row[c] - mean[c]) * inv_std[c];
    }
    if (mean_out) *mean_out = std::move(mean);
    if (inv_std_out) *inv_std_out = std::move(inv_std);
}

}  // namespace

// --- DecoderSpec -----------------------------------------------------------

std::size_t DecoderSpec::output_side() const noexcept {
    const std::size_t layers = num_layers();
    if (layers == 0) return 0;
    return latent_side << (layers - 1);
}

std::size_t DecoderSpec::parameter_count() const noexcept {
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < channels.size(); ++l) total += channels[l] * channels[l + 1];
    return total;
}

GridShape DecoderSpec::grid_at(std::size_t layer) const noexcept {
    const std::size_t side = latent_side << layer;
    return {side, side};
}

void DecoderSpec::validate() const {
    require(num_layers() >= 2, "decoder spec: need at least 2 weight layers (channels list of length >= 3)");
    require(latent_side >= 1, "decoder spec: latent_side must be >= 1");
    for (std::size_t k : channels) require(k >= 1, "decoder spec: channel counts must be positive");
    require(num_layers() < 20, "decoder spec: too many layers");
    require(parameter_count() < output_dim(),
            "decoder spec: " + std::to_string(parameter_count()) + " weights is not fewer than output dimension " +
                std::to_string(output_dim()) + " (prior must be under-parameterized)");
}

DecoderSpec DecoderSpec::parse(std::string_view text) {
    DecoderSpec spec;
    std::optional<std::size_t> layers;
    bool have_channels = false, have_side = false;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("decoder spec: expected key=value, got '" + line + "'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key == "layers") {
            layers = parse_count(key, value);
        } else if (key == "channels") {
            spec.channels.clear();
            std::istringstream list(value);
            std::string item;
            while (std::getline(list, item, ',')) spec.channels.push_back(parse_count(key, trim(item)));
            have_channels = true;
        } else if (key == "latent_side") {
            spec.latent_side = parse_count(key, value);
            have_side = true;
        } else if (key == "channel_norm") {
            spec.channel_norm = parse_flag(key, value);
        } else if (key == "sigmoid") {
            spec.output_sigmoid = parse_flag(key, value);
        } else {
            throw Error("decoder spec: unknown key '" + key + "'");
        }
    }
    require(have_channels, "decoder spec: missing 'channels'");
    require(have_side, "decoder spec: missing 'latent_side'");
    if (layers && *layers != spec.num_layers())
        throw Error("decoder spec: layers=" + std::to_string(*layers) + " but channels describe " +
                    std::to_string(spec.num_layers()) + " weight layers");
    spec.validate();
    return spec;
}

DecoderSpec DecoderSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open decoder spec '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string DecoderSpec::to_string() const {
    std::ostringstream out;
    out << "layers=" << num_layers() << "\nchannels=";
    for (std::size_t i = 0; i < channels.size(); ++i) out << (i ? "," : "") << channels[i];
    out << "\nlatent_side=" << latent_side << "\nchannel_norm=" << (channel_norm ? "true" : "false")
        << "\nsigmoid=" << (output_sigmoid ? "true" : "false") << "\n";
    return out.str();
}

DecoderSpec DecoderSpec::mnist() { return DecoderSpec{{15, 15, 10, 1}, 7, false, true}; }

// --- latent and weights ----------------------------------------------------

LatentCode make_latent(const DecoderSpec& spec, std::uint64_t seed) {
    spec.validate();
    SeededRng rng(seed);
    return {uniform_sample(rng, spec.latent_pixels(), spec.channels.front(), 0.0, 1.0), seed};
}

std::size_t DecoderWeights::parameter_count() const noexcept {
    std::size_t total = 0;
    for (const auto& w : layers) total += w.size();
    return total;
}

Vector DecoderWeights::flatten() const {
    Vector flat;
    flat.reserve(parameter_count());
    for (const auto& w : layers) flat.insert(flat.end(), w.values().begin(), w.values().end());
    return flat;
}

void DecoderWeights::assign_flat(std::span<const double> flat) {
    require(flat.size() == parameter_count(), "DecoderWeights: flat vector has wrong length");
    std::size_t offset = 0;
    for (auto& w : layers) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), w.size(), w.data().begin());
        offset += w.size();
    }
}

DecoderWeights DecoderWeights::zeros_like() const {
    DecoderWeights out;
    out.layers.reserve(layers.size());
    for (const auto& w : layers) out.layers.emplace_back(w.rows(), w.cols());
    return out;
}

bool DecoderWeights::all_finite() const noexcept {
    return std::all_of(layers.begin(), layers.end(), [](const DenseMatrix& w) { return w.all_finite(); });
}

DecoderWeights init_weights(const DecoderSpec& spec, SeededRng& rng) {
    spec.validate();
    DecoderWeights w;
    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
        const std::size_t fan_in = spec.channels[l];
        const std::size_t fan_out = spec.channels[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        w.layers.push_back(uniform_sample(rng, fan_in, fan_out, -bound, bound));
    }
    return w;
}

void check_weights(const DecoderSpec& spec, const DecoderWeights& weights) {
    require(weights.layers.size() == spec.num_layers(),
            "decoder weights: expected " + std::to_string(spec.num_layers()) + " layers, got " +
                std::to_string(weights.layers.size()));
    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
        const auto& w = weights.layers[l];
        require(w.rows() == spec.channels[l] && w.cols() == spec.channels[l + 1],
                "decoder weights: layer " + std::to_string(l + 1) + " has shape " + std::to_string(w.rows()) + "x" +
                    std::to_string(w.cols()) + ", expected " + std::to_string(spec.channels[l]) + "x" +
                    std::to_string(spec.channels[l + 1]));
    }
}

// --- forward / backward ----------------------------------------------------

namespace {

void check_inputs(const DecoderSpec& spec, const DecoderWeights& weights, const LatentCode& latent) {
    spec.validate();
    check_weights(spec, weights);
    require(latent.z.rows() == spec.latent_pixels() && latent.z.cols() == spec.channels.front(),
            "latent code shape does not match decoder spec");
}

template <bool kRecord>
Vector run_forward(const DecoderSpec& spec, const DecoderWeights& weights, const LatentCode& latent,
                   ForwardTape* tape) {
    check_inputs(spec, weights, latent);
    const std::size_t layers = spec.num_layers();
    DenseMatrix z = latent.z;
    for (std::size_t l = 0; l + 1 < layers; ++l) {
        DenseMatrix pre = mat_mul(z, weights.layers[l]);
        DenseMatrix act = pre;
        relu_inplace(act);
        Vector mean, inv_std;
        if (spec.channel_norm) normalize_channels(act, kRecord ? &mean : nullptr, kRecord ? &inv_std : nullptr);
        DenseMatrix next = upsample_channels(act, spec.grid_at(l));
        if constexpr (kRecord) {
            tape->hidden.push_back({std::move(z), std::move(pre), std::move(act), std::move(mean), std::move(inv_std)});
        }
        z = std::move(next);
    }
    DenseMatrix out = mat_mul(z, weights.layers.back());
    Vector x = std::move(out).values();
    if (spec.output_sigmoid)
        for (double& v : x) v = sigmoid(v);
    if constexpr (kRecord) {
        tape->last_input = std::move(z);
        tape->output = x;
    }
    return x;
}

}  // namespace

ForwardResult forward(const DecoderSpec& spec, const DecoderWeights& weights, const LatentCode& latent) {
    ForwardResult result;
    result.image = run_forward<true>(spec, weights, latent, &result.tape);
    return result;
}

Vector generate(const DecoderSpec& spec, const DecoderWeights& weights, const LatentCode& latent) {
    return run_forward<false>(spec, weights, latent, nullptr);
}

DecoderWeights backward(const DecoderSpec& spec, const DecoderWeights& weights, const ForwardTape& tape,
                        std::span<const double> upstream) {
    check_weights(spec, weights);
    const std::size_t layers = spec.num_layers();
    require(tape.hidden.size() + 1 == layers, "backward: tape depth does not match decoder spec");
    require(tape.output.size() == spec.output_dim() && tape.last_input.rows() == spec.output_pixels(),
            "backward: tape shape does not match decoder spec");
    require(upstream.size() == spec.output_dim(), "backward: upstream gradient has length " +
                                                      std::to_string(upstream.size()) + ", expected " +
                                                      std::to_string(spec.output_dim()));

    DecoderWeights grads = weights.zeros_like();
    DenseMatrix d_out(spec.output_pixels(), spec.output_channels(), Vector(upstream.begin(), upstream.end()));
    if (spec.output_sigmoid) {
        auto g = d_out.data();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= tape.output[i] * (1.0 - tape.output[i]);
    }
    grads.layers.back() = mat_mul_tn(tape.last_input, d_out);
    DenseMatrix d_z = mat_mul_nt(d_out, weights.layers.back());

    for (std::size_t l = layers - 1; l-- > 0;) {
        const auto& rec = tape.hidden[l];
        DenseMatrix d_act = upsample_channels_adjoint(d_z, spec.grid_at(l));
        const std::size_t rows = d_act.rows();
        const std::size_t cols = d_act.cols();
        if (spec.channel_norm) {
            // d_a = inv_std * (d_n - mean(d_n) - n * mean(d_n * n))
            Vector mean_g(cols, 0.0), mean_gn(cols, 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                auto g = d_act.row(r);
                auto n = rec.activation.row(r);
                for (std::size_t c = 0; c < cols; ++c) {
                    mean_g[c] += g[c];
                    mean_gn[c] += g[c] * n[c];
                }
            }
            for (std::size_t c = 0; c < cols; ++c) {
                mean_g[c] /= static_cast<double>(rows);
                mean_gn[c] /= static_cast<double>(rows);
            }
            for (std::size_t r = 0; r < rows; ++r) {
                auto g = d_act.row(r);
                auto n = rec.activation.row(r);
                for (std::size_t c = 0; c < cols; ++c)
                    g[c] = rec.inv_std[c] * (g[c] - mean_g[c] - n[c] * mean_gn[c]);
            }
        }
        auto g = d_act.data();
        auto pre = rec.pre.data();
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!(pre[i] > 0.0)) g[i] = 0.0;
        grads.layers[l] = mat_mul_tn(rec.input, d_act);
        if (l > 0) d_z = mat_mul_nt(d_act, weights.layers[l]);
    }
    return grads;
}

DecoderWeights grad_weights(const DecoderSpec& spec, const DecoderWeights& weights, const LatentCode& latent,
                            std::span<const double> upstream) {
    const ForwardResult fwd = forward(spec, weights, latent);
    return backward(spec, weights, fwd.tape, upstream);
}

// --- optimizers ------------------------------------------------------------

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "momentum"; }

OptimizerKind parse_optimizer(const std::string& text) {
    if (text == "adam") return OptimizerKind::Adam;
    if (text == "momentum") return OptimizerKind::Momentum;
    throw Error("unknown optimizer '" + text + "' (expected adam or momentum)");
}

GradientStepper::GradientStepper(OptimizerKind kind, std::size_t size, double lr, double momentum)
    : kind_(kind), lr_(lr), momentum_(momentum), first_(size, 0.0) {
    require(lr > 0.0, "optimizer: learning rate must be positive");
    require(momentum >= 0.0 && momentum < 1.0, "optimizer: momentum must lie in [0, 1)");
    if (kind_ == OptimizerKind::Adam) second_.assign(size, 0.0);
}

void GradientStepper::step(std::span<double> params, std::span<const double> grad) {
    require(params.size() == first_.size() && grad.size() == first_.size(), "optimizer: size mismatch");
    ++count_;
    if (kind_ == OptimizerKind::Momentum) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            first_[i] = momentum_ * first_[i] + grad[i];
            params[i] -= lr_ * first_[i];
        }
        return;
    }
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    const double bias1 = 1.0 - std::pow(momentum_, static_cast<double>(count_));
    const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(count_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        first_[i] = momentum_ * first_[i] + (1.0 - momentum_) * grad[i];
        second_[i] = kBeta2 * second_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        const double m_hat = first_[i] / bias1;
        const double v_hat = second_[i] / bias2;
        params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + kEps);
    }
}

// --- projection ------------------------------------------------------------

ProjectionResult project(const DecoderSpec& spec, const LatentCode& latent, std::span<const double> target,
                         const DecoderWeights& warm_start, const ProjectionOptions& options) {
    GradientStepper stepper(options.optimizer, warm_start.parameter_count(), options.inner_lr, options.momentum);
    return project(spec, latent, target, warm_start, options, stepper);
}

ProjectionResult project(const DecoderSpec& spec, const LatentCode& latent, std::span<const double> target,
                         const DecoderWeights& warm_start, const ProjectionOptions& options,
                         GradientStepper& stepper) {
    require(options.inner_iters >= 1, "project: inner_iters must be >= 1");
    require(options.inner_lr > 0.0, "project: inner_lr must be positive");
    require(target.size() == spec.output_dim(), "project: target has length " + std::to_string(target.size()) +
                                                    ", decoder output is " + std::to_string(spec.output_dim()));
    DecoderWeights w = warm_start;
    Vector params = w.flatten();
    Vector residual(target.size());

    ProjectionResult result{warm_start, 0.0, 0, 0.0};
    for (std::size_t it = 0;; ++it) {
        ForwardResult fwd = forward(spec, w, latent);
        double loss = 0.0;
        for (std::size_t i = 0; i < residual.size(); ++i) {
            residual[i] = fwd.image[i] - target[i];
            loss += residual[i] * residual[i];
        }
        if (!std::isfinite(loss)) throw DivergenceError("project: non-finite loss at inner iteration " +
                                                            std::to_string(it), it);
        if (it == 0) {
            result.initial_loss = loss;
            result.fit_loss = loss;
        } else if (loss > 1e6 * std::max(result.initial_loss, 1e-300)) {
            throw DivergenceError("project: loss diverged at inner iteration " + std::to_string(it), it);
        } else if (loss < result.fit_loss) {
            result.fit_loss = loss;
            result.weights = w;
            result.best_iter = it;
        }
        if (it == options.inner_iters || loss == 0.0) break;

        for (double& r : residual) r *= 2.0;
        stepper.step(params, backward(spec, w, fwd.tape, residual).flatten());
        w.assign_flat(params);
    }
    return result;
}

}  // namespace netpgd
