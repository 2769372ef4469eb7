#include "netpgd/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "netpgd/transforms.hpp"

namespace netpgd {

void SolverConfig::validate() const {
    require(eta > 0.0, "solver config: eta must be positive");
    require(max_outer_iters >= 1, "solver config: max_outer_iters must be >= 1");
    require(tol >= 0.0, "solver config: tol must be >= 0");
    require(inner_iters >= 1, "solver config: inner_iters must be >= 1");
    require(inner_lr > 0.0, "solver config: inner_lr must be positive");
    require(momentum >= 0.0 && momentum < 1.0, "solver config: momentum must lie in [0, 1)");
}

SolverConfig SolverConfig::cs_defaults() { return SolverConfig{}; }

SolverConfig SolverConfig::cpr_defaults() {
    SolverConfig cfg;
    cfg.eta = 1.0;
    return cfg;
}

double nmse(std::span<const double> xhat, std::span<const double> xstar, bool sign_resolve) {
    require(xhat.size() == xstar.size(), "nmse: length mismatch");
    const double ref = squared_norm(xstar);
    require(ref > 0.0, "nmse: reference image is zero");
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i < xhat.size(); ++i) {
        const double dp = xhat[i] - xstar[i];
        const double dm = xhat[i] + xstar[i];
        plus += dp * dp;
        minus += dm * dm;
    }
    return (sign_resolve ? std::min(plus, minus) : plus) / ref;
}

double lasso_lambda_from_alpha(double alpha, std::size_t n) { return 2.0 * static_cast<double>(n) * alpha; }

namespace {

struct Problem {
    std::span<const double> y;
    const MeasurementOperator& op;
    MeasurementMode mode;
    double y_norm;
};

void check_problem(std::span<const double> y, const MeasurementOperator& op, const DecoderSpec& spec,
                   const LatentCode& latent, const SolverConfig& cfg, MeasurementMode mode) {
    cfg.validate();
    spec.validate();
    require(y.size() == op.n(), "solver: measurement vector has length " + std::to_string(y.size()) +
                                    ", operator has n = " + std::to_string(op.n()));
    require(op.d() == spec.output_dim(), "solver: operator dimension " + std::to_string(op.d()) +
                                             " does not match decoder output " + std::to_string(spec.output_dim()));
    require(latent.z.rows() == spec.latent_pixels() && latent.z.cols() == spec.channels.front(),
            "solver: latent code does not match decoder spec");
    if (mode == MeasurementMode::Magnitude)
        for (double v : y) require(v >= 0.0, "solver: magnitude measurements must be nonnegative");
    for (double v : y) require(std::isfinite(v), "solver: measurements contain non-finite values");
}

DecoderWeights starting_weights(const DecoderSpec& spec, const SolverConfig& cfg,
                                const std::optional<DecoderWeights>& w0) {
    if (w0) {
        check_weights(spec, *w0);
        return *w0;
    }
    SeededRng rng(cfg.seed);
    return init_weights(spec, rng);
}

/// Measurement loss ‖y − f(x)‖² plus the residual Ax − y∘p used by the gradient,
/// where p = 1 for linear and sign(Ax) for magnitude measurements.
struct Evaluation {
    double loss = 0.0;
    Vector ax;
    Vector signed_residual;
};

Evaluation evaluate(const Problem& prob, std::span<const double> x) {
    Evaluation ev;
    ev.ax = netpgd::apply(prob.op, x);
    ev.signed_residual.resize(ev.ax.size());
    for (std::size_t i = 0; i < ev.ax.size(); ++i) {
        const double ax = ev.ax[i];
        if (prob.mode == MeasurementMode::Linear) {
            ev.signed_residual[i] = ax - prob.y[i];
            ev.loss += ev.signed_residual[i] * ev.signed_residual[i];
        } else {
            ev.signed_residual[i] = ax - prob.y[i] * sign_of(ax);
            const double r = std::abs(ax) - prob.y[i];
            ev.loss += r * r;
        }
    }
    if (!std::isfinite(ev.loss)) throw Error("solver: non-finite measurement loss");
    return ev;
}

bool residual_small(const Problem& prob, double loss, double tol) {
    const double res = std::sqrt(loss);
    return prob.y_norm > 0.0 ? res / prob.y_norm < tol : res <= tol;
}

void annotate(IterationRecord& rec, std::span<const double> x, const Evaluation& ev, const Problem& prob,
              const std::optional<Reference>& reference) {
    if (!reference) return;
    rec.nmse = nmse(x, reference->image, reference->sign_resolve);
    if (prob.mode == MeasurementMode::Magnitude) {
        // ε_p = Aᵀ(Ax* − y∘p): the gap between the step taken and the one
        // the true signs would give.
        const Vector ax_star = netpgd::apply(prob.op, reference->image);
        Vector diff(ax_star.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = ax_star[i] - prob.y[i] * sign_of(ev.ax[i]);
        rec.phase_error = norm2(apply_adjoint(prob.op, diff));
    }
}

SolverTrace run_net_pgd(const Problem& prob, const DecoderSpec& spec, const LatentCode& latent,
                        const SolverConfig& cfg, const std::optional<DecoderWeights>& w0,
                        const std::optional<Reference>& reference) {
    SolverTrace trace;
    DecoderWeights w = starting_weights(spec, cfg, w0);
    Vector x = generate(spec, w, latent);
    trace.initial_image = x;
    double fit_loss = std::numeric_limits<double>::quiet_NaN();
    const ProjectionOptions popt = cfg.projection();
    GradientStepper carried(popt.optimizer, w.parameter_count(), popt.inner_lr, popt.momentum);

    for (std::size_t t = 0;; ++t) {
        const Evaluation ev = evaluate(prob, x);
        IterationRecord rec;
        rec.t = t;
        rec.measurement_loss = ev.loss;
        rec.fit_loss = fit_loss;
        rec.step_size = cfg.eta;
        annotate(rec, x, ev, prob, reference);
        trace.records.push_back(rec);

        if (residual_small(prob, ev.loss, cfg.tol)) {
            trace.converged = true;
            break;
        }
        if (t == cfg.max_outer_iters) break;

        // v = x − η Aᵀ(Ax − y∘p)
        const Vector grad = apply_adjoint(prob.op, ev.signed_residual);
        Vector v(x.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i] - cfg.eta * grad[i];

        ProjectionResult proj =
            cfg.carry_optimizer ? project(spec, latent, v, w, popt, carried) : project(spec, latent, v, w, popt);
        w = std::move(proj.weights);
        fit_loss = proj.fit_loss;
        x = generate(spec, w, latent);
    }
    trace.image = std::move(x);
    trace.weights = std::move(w);
    return trace;
}

}  // namespace

SolverTrace net_pgd_cs(std::span<const double> y, const MeasurementOperator& op, const DecoderSpec& spec,
                       const LatentCode& latent, const SolverConfig& cfg, const std::optional<DecoderWeights>& w0,
                       const std::optional<Reference>& reference) {
    check_problem(y, op, spec, latent, cfg, MeasurementMode::Linear);
    const Problem prob{y, op, MeasurementMode::Linear, norm2(y)};
    return run_net_pgd(prob, spec, latent, cfg, w0, reference);
}

SolverTrace net_pgd_cpr(std::span<const double> y, const MeasurementOperator& op, const DecoderSpec& spec,
                        const LatentCode& latent, const SolverConfig& cfg, const std::optional<DecoderWeights>& w0,
                        const std::optional<Reference>& reference) {
    check_problem(y, op, spec, latent, cfg, MeasurementMode::Magnitude);
    const Problem prob{y, op, MeasurementMode::Magnitude, norm2(y)};
    return run_net_pgd(prob, spec, latent, cfg, w0, reference);
}

SolverTrace net_gd(std::span<const double> y, const MeasurementOperator& op, MeasurementMode mode,
                   const DecoderSpec& spec, const LatentCode& latent, const SolverConfig& cfg,
                   const std::optional<DecoderWeights>& w0, const std::optional<Reference>& reference) {
    check_problem(y, op, spec, latent, cfg, mode);
    const Problem prob{y, op, mode, norm2(y)};

    SolverTrace trace;
    DecoderWeights w = starting_weights(spec, cfg, w0);
    Vector params = w.flatten();
    GradientStepper stepper(cfg.optimizer, params.size(), cfg.inner_lr, cfg.momentum);
    const double initial_loss = evaluate(prob, generate(spec, w, latent)).loss;

    for (std::size_t step = 0;; ++step) {
        ForwardResult fwd = forward(spec, w, latent);
        if (step == 0) trace.initial_image = fwd.image;
        const Evaluation ev = evaluate(prob, fwd.image);
        if (ev.loss > 1e6 * std::max(initial_loss, 1e-300))
            throw DivergenceError("net_gd: loss diverged at step " + std::to_string(step), step);

        const bool at_record = step % cfg.inner_iters == 0;
        const std::size_t t = step / cfg.inner_iters;
        const bool done = residual_small(prob, ev.loss, cfg.tol);
        if (at_record || done) {
            IterationRecord rec;
            rec.t = at_record ? t : t + 1;
            rec.measurement_loss = ev.loss;
            rec.step_size = cfg.inner_lr;
            annotate(rec, fwd.image, ev, prob, reference);
            trace.records.push_back(rec);
        }
        if (done) {
            trace.converged = true;
            trace.image = std::move(fwd.image);
            break;
        }
        if (at_record && t == cfg.max_outer_iters) {
            trace.image = std::move(fwd.image);
            break;
        }

        // d/dx ‖y − f(x)‖² = 2 Aᵀ(Ax − y∘p)
        Vector upstream = apply_adjoint(op, ev.signed_residual);
        for (double& g : upstream) g *= 2.0;
        stepper.step(params, backward(spec, w, fwd.tape, upstream).flatten());
        w.assign_flat(params);
    }
    trace.weights = std::move(w);
    return trace;
}

IstaResult ista_dct(std::span<const double> y, const MeasurementOperator& op, double lambda, std::size_t iters) {
    require(lambda > 0.0, "ista_dct: lambda must be positive");
    require(y.size() == op.n(), "ista_dct: measurement vector length does not match operator");
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(op.d()))));
    require(side * side == op.d(), "ista_dct: image dimension " + std::to_string(op.d()) + " is not square");

    const DenseMatrix basis = dct2_basis(side);
    const DenseMatrix m = mat_mul(op.matrix, basis);

    // Largest eigenvalue of MᵀM by power iteration from a fixed start.
    Vector u(op.d(), 1.0 / std::sqrt(static_cast<double>(op.d())));
    double sigma2 = 0.0;
    for (int k = 0; k < 50; ++k) {
        Vector mu = mat_tvec(m, mat_vec(m, u));
        sigma2 = norm2(mu);
        if (sigma2 == 0.0) break;
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = mu[i] / sigma2;
    }
    // Gradient of ‖y − Mc‖² is 2Mᵀ(Mc − y) with Lipschitz constant 2σ²; the
    // small margin covers the power-iteration underestimate.
    const double step = sigma2 > 0.0 ? 1.0 / (2.0 * 1.01 * sigma2) : 0.0;

    auto objective = [&](const Vector& c) {
        const Vector mc = mat_vec(m, c);
        double loss = 0.0;
        for (std::size_t i = 0; i < mc.size(); ++i) loss += (y[i] - mc[i]) * (y[i] - mc[i]);
        double l1 = 0.0;
        for (double v : c) l1 += std::abs(v);
        return loss + lambda * l1;
    };

    IstaResult result;
    result.step = step;
    Vector c(op.d(), 0.0);
    result.objective.push_back(objective(c));
    const double threshold = lambda * step;
    for (std::size_t it = 0; it < iters && step > 0.0; ++it) {
        Vector r = mat_vec(m, c);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
        const Vector g = mat_tvec(m, r);
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double z = c[i] - 2.0 * step * g[i];
            c[i] = z > threshold ? z - threshold : (z < -threshold ? z + threshold : 0.0);
        }
        result.objective.push_back(objective(c));
    }
    result.image = mat_vec(basis, c);
    result.coefficients = std::move(c);
    return result;
}

}  // namespace netpgd
