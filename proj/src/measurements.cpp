#include "netpgd/measurements.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace netpgd {

MeasurementOperator MeasurementOperator::from_matrix(DenseMatrix m, std::uint64_t seed) {
    require(m.rows() >= 1 && m.cols() >= 1, "measurement operator: empty matrix");
    return {std::move(m), seed};
}

MeasurementOperator make_operator(std::size_t n, std::size_t d, SeededRng& rng) {
    require(n >= 1 && d >= 1, "make_operator: n and d must be >= 1");
    return {gaussian_sample(rng, n, d, 1.0 / std::sqrt(static_cast<double>(n))), rng.seed()};
}

MeasurementOperator make_operator(std::size_t n, std::size_t d, std::uint64_t seed) {
    SeededRng rng(seed);
    return make_operator(n, d, rng);
}

MeasurementOperator make_orthonormal_operator(std::size_t n, std::size_t d, std::uint64_t seed) {
    require(n >= 1 && n <= d, "make_orthonormal_operator: need 1 <= n <= d");
    SeededRng rng(seed);
    DenseMatrix m = gaussian_sample(rng, n, d, 1.0);
    // Modified Gram-Schmidt over rows, two passes for numerical orthogonality.
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
            auto ri = m.row(i);
            for (std::size_t j = 0; j < i; ++j) {
                auto rj = m.row(j);
                const double proj = dot(ri, rj);
                for (std::size_t k = 0; k < d; ++k) ri[k] -= proj * rj[k];
            }
            const double len = norm2(ri);
            require(len > 1e-12, "make_orthonormal_operator: rank deficient draw");
            for (double& v : ri) v /= len;
        }
    }
    return {std::move(m), seed};
}

Vector apply(const MeasurementOperator& op, std::span<const double> x) { return mat_vec(op.matrix, x); }

Vector apply_adjoint(const MeasurementOperator& op, std::span<const double> r) { return mat_tvec(op.matrix, r); }

Vector apply_magnitude(const MeasurementOperator& op, std::span<const double> x) {
    Vector y = netpgd::apply(op, x);
    for (double& v : y) v = std::abs(v);
    return y;
}

std::string to_string(RecMode mode) { return mode == RecMode::Range ? "range" : "difference"; }

RecMode parse_rec_mode(const std::string& text) {
    if (text == "range") return RecMode::Range;
    if (text == "difference") return RecMode::Difference;
    throw Error("unknown REC mode '" + text + "' (expected range or difference)");
}

namespace {

struct SandwichTally {
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = -std::numeric_limits<double>::infinity();
    std::size_t passed = 0;
    std::size_t seen = 0;

    bool add(const MeasurementOperator& op, std::span<const double> h, double alpha) {
        const double hh = squared_norm(h);
        const double ratio = squared_norm(netpgd::apply(op, h)) / hh;
        min_ratio = std::min(min_ratio, ratio);
        max_ratio = std::max(max_ratio, ratio);
        ++seen;
        const bool ok = ratio >= 1.0 - alpha && ratio <= 1.0 + alpha;
        if (ok) ++passed;
        return ok;
    }
};

void check_alpha(double alpha) { require(alpha > 0.0 && alpha < 1.0, "REC check: alpha must lie in (0, 1)"); }

}  // namespace

RecReport rec_sandwich(const MeasurementOperator& op, const std::vector<Vector>& vectors, double alpha) {
    check_alpha(alpha);
    require(!vectors.empty(), "rec_sandwich: no vectors");
    SandwichTally tally;
    RecReport report;
    for (const auto& h : vectors) {
        require(h.size() == op.d(), "rec_sandwich: vector length does not match operator");
        if (norm2(h) < 1e-9) {
            ++report.discarded;
            continue;
        }
        tally.add(op, h, alpha);
    }
    require(tally.seen > 0, "rec_sandwich: every vector was degenerate");
    report.alpha = alpha;
    report.trials = tally.seen;
    report.vectors_per_trial = 1;
    report.pass_rate = static_cast<double>(tally.passed) / static_cast<double>(tally.seen);
    report.vector_pass_rate = report.pass_rate;
    report.min_ratio = tally.min_ratio;
    report.max_ratio = tally.max_ratio;
    return report;
}

namespace {

void check_rec_inputs(const DecoderSpec& spec, std::size_t d, const RecOptions& options) {
    check_alpha(options.alpha);
    require(options.trials >= 1, "REC check: trials must be >= 1");
    require(options.vectors_per_trial >= 1, "REC check: vectors_per_trial must be >= 1");
    require(!spec.output_sigmoid, "REC check: decoder output sigmoid must be off (range must be a union of subspaces)");
    require(spec.output_dim() == d, "REC check: decoder output dimension " + std::to_string(spec.output_dim()) +
                                        " does not match operator dimension " + std::to_string(d));
}

// One trial: vectors_per_trial draws from the range (or its differences), all
// of which must satisfy the sandwich.
bool run_trial(const MeasurementOperator& op, const DecoderSpec& spec, const LatentCode& latent,
               const RecOptions& options, SeededRng& rng, SandwichTally& tally, RecReport& report) {
    constexpr std::size_t kMaxRedraws = 1000;
    bool trial_ok = true;
    for (std::size_t v = 0; v < options.vectors_per_trial; ++v) {
        Vector h;
        for (std::size_t attempt = 0;; ++attempt) {
            require(attempt < kMaxRedraws, "REC check: decoder keeps producing zero vectors");
            h = generate(spec, init_weights(spec, rng), latent);
            if (options.mode == RecMode::Difference) {
                const Vector other = generate(spec, init_weights(spec, rng), latent);
                for (std::size_t i = 0; i < h.size(); ++i) h[i] -= other[i];
            }
            if (norm2(h) >= 1e-9) break;
            ++report.discarded;
        }
        trial_ok = tally.add(op, h, options.alpha) && trial_ok;
    }
    return trial_ok;
}

void finish(RecReport& report, const SandwichTally& tally, std::size_t passed_trials, const RecOptions& options) {
    report.alpha = options.alpha;
    report.trials = options.trials;
    report.vectors_per_trial = options.vectors_per_trial;
    report.pass_rate = static_cast<double>(passed_trials) / static_cast<double>(options.trials);
    report.vector_pass_rate = static_cast<double>(tally.passed) / static_cast<double>(tally.seen);
    report.min_ratio = tally.min_ratio;
    report.max_ratio = tally.max_ratio;
}

}  // namespace

RecReport rec_check(const MeasurementOperator& op, const DecoderSpec& spec, const LatentCode& latent,
                    const RecOptions& options, std::uint64_t seed) {
    check_rec_inputs(spec, op.d(), options);
    RecReport report;
    SandwichTally tally;
    std::size_t passed_trials = 0;
    for (std::size_t t = 0; t < options.trials; ++t) {
        SeededRng rng = SeededRng::derive(seed, t);
        if (run_trial(op, spec, latent, options, rng, tally, report)) ++passed_trials;
    }
    finish(report, tally, passed_trials, options);
    return report;
}

RecReport rec_check(std::size_t n, const DecoderSpec& spec, const LatentCode& latent, const RecOptions& options,
                    std::uint64_t seed, bool orthonormal) {
    require(n >= 1, "REC check: n must be >= 1");
    const std::size_t d = spec.output_dim();
    check_rec_inputs(spec, d, options);
    RecReport report;
    SandwichTally tally;
    std::size_t passed_trials = 0;
    for (std::size_t t = 0; t < options.trials; ++t) {
        // Streams depend on (seed, t) only, so every n sees the same weight
        // draws and operators that share their leading rows.
        SeededRng op_rng = SeededRng::derive(seed, 2 * t + 1);
        const MeasurementOperator op =
            orthonormal ? make_orthonormal_operator(n, d, op_rng.next_u64()) : make_operator(n, d, op_rng);
        SeededRng rng = SeededRng::derive(seed, 2 * t);
        if (run_trial(op, spec, latent, options, rng, tally, report)) ++passed_trials;
    }
    finish(report, tally, passed_trials, options);
    return report;
}

}  // namespace netpgd
