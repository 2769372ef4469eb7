#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "netpgd/decoder.hpp"
#include "netpgd/image.hpp"
#include "netpgd/measurements.hpp"
#include "netpgd/rng.hpp"
#include "netpgd/solvers.hpp"

namespace py = pybind11;
using namespace netpgd;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Vector to_vector(const Array& a) {
    if (a.ndim() != 1) throw Error("expected a 1-d array, got " + std::to_string(a.ndim()) + " dimensions");
    return Vector(a.data(), a.data() + a.size());
}

Array to_array(const Vector& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Array to_array(const DenseMatrix& m) {
    Array out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

DenseMatrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw Error("expected a 2-d array");
    return DenseMatrix(a.shape(0), a.shape(1), Vector(a.data(), a.data() + a.size()));
}

std::optional<DecoderWeights> opt_weights(const py::object& w) {
    if (w.is_none()) return std::nullopt;
    return w.cast<DecoderWeights>();
}

// Reference spans point into `keep`, which must outlive the solver call.
std::optional<Reference> opt_reference(const py::object& ref, bool sign_resolve, Vector& keep) {
    if (ref.is_none()) return std::nullopt;
    keep = to_vector(ref.cast<Array>());
    return Reference{keep, sign_resolve};
}

py::list records(const SolverTrace& tr) {
    py::list out;
    for (const auto& r : tr.records) {
        py::dict d;
        d["t"] = r.t;
        d["measurement_loss"] = r.measurement_loss;
        d["fit_loss"] = r.fit_loss;
        d["nmse"] = r.nmse;
        d["phase_error"] = r.phase_error;
        d["step_size"] = r.step_size;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_netpgd, m) {
    m.doc() = "Net-PGD reconstruction core";

    py::register_exception<Error>(m, "NetpgdError", PyExc_ValueError);

    py::class_<DecoderSpec>(m, "DecoderSpec")
        .def(py::init([](std::vector<std::size_t> channels, std::size_t latent_side, bool channel_norm,
                         bool output_sigmoid) {
                 DecoderSpec s{std::move(channels), latent_side, channel_norm, output_sigmoid};
                 s.validate();
                 return s;
             }),
             py::arg("channels"), py::arg("latent_side"), py::arg("channel_norm") = false,
             py::arg("output_sigmoid") = true)
        .def_static("mnist", &DecoderSpec::mnist)
        .def_static("parse", [](const std::string& text) { return DecoderSpec::parse(text); })
        .def_static("load", &DecoderSpec::load)
        .def_readonly("channels", &DecoderSpec::channels)
        .def_readonly("latent_side", &DecoderSpec::latent_side)
        .def_readonly("channel_norm", &DecoderSpec::channel_norm)
        .def_readonly("output_sigmoid", &DecoderSpec::output_sigmoid)
        .def_property_readonly("output_side", &DecoderSpec::output_side)
        .def_property_readonly("output_dim", &DecoderSpec::output_dim)
        .def_property_readonly("parameter_count", &DecoderSpec::parameter_count)
        .def("__str__", &DecoderSpec::to_string)
        .def("__repr__", [](const DecoderSpec& s) { return "DecoderSpec(" + s.to_string() + ")"; });

    py::class_<LatentCode>(m, "LatentCode")
        .def_property_readonly("z", [](const LatentCode& l) { return to_array(l.z); })
        .def_readonly("seed", &LatentCode::seed);

    py::class_<DecoderWeights>(m, "DecoderWeights")
        .def_property_readonly("parameter_count", &DecoderWeights::parameter_count)
        .def_property_readonly("layers",
                               [](const DecoderWeights& w) {
                                   py::list out;
                                   for (const auto& l : w.layers) out.append(to_array(l));
                                   return out;
                               })
        .def_static("from_layers",
                    [](const std::vector<Array>& layers) {
                        DecoderWeights w;
                        for (const auto& a : layers) w.layers.push_back(to_matrix(a));
                        return w;
                    })
        .def("flatten", [](const DecoderWeights& w) { return to_array(w.flatten()); })
        .def("assign_flat", [](DecoderWeights& w, const Array& flat) { w.assign_flat(to_vector(flat)); });

    m.def("make_latent", &make_latent, py::arg("spec"), py::arg("seed") = 0);
    m.def(
        "init_weights",
        [](const DecoderSpec& spec, std::uint64_t seed) {
            SeededRng rng(seed);
            return init_weights(spec, rng);
        },
        py::arg("spec"), py::arg("seed"));
    m.def(
        "generate",
        [](const DecoderSpec& spec, const DecoderWeights& w, const LatentCode& latent) {
            return to_array(generate(spec, w, latent));
        },
        py::arg("spec"), py::arg("weights"), py::arg("latent"));
    m.def(
        "grad_weights",
        [](const DecoderSpec& spec, const DecoderWeights& w, const LatentCode& latent, const Array& upstream) {
            return grad_weights(spec, w, latent, to_vector(upstream));
        },
        py::arg("spec"), py::arg("weights"), py::arg("latent"), py::arg("upstream"));
    m.def(
        "project",
        [](const DecoderSpec& spec, const LatentCode& latent, const Array& target, const DecoderWeights& warm,
           std::size_t inner_iters, double inner_lr, const std::string& optimizer) {
            ProjectionOptions opt{inner_iters, inner_lr, 0.9, parse_optimizer(optimizer)};
            const ProjectionResult r = project(spec, latent, to_vector(target), warm, opt);
            return py::make_tuple(r.weights, r.fit_loss);
        },
        py::arg("spec"), py::arg("latent"), py::arg("target"), py::arg("warm_start"), py::arg("inner_iters") = 200,
        py::arg("inner_lr") = 0.01, py::arg("optimizer") = "adam");

    py::class_<MeasurementOperator>(m, "MeasurementOperator")
        .def_property_readonly("n", &MeasurementOperator::n)
        .def_property_readonly("d", &MeasurementOperator::d)
        .def_readonly("seed", &MeasurementOperator::seed)
        .def_property_readonly("matrix", [](const MeasurementOperator& op) { return to_array(op.matrix); })
        .def_static("from_matrix", [](const Array& a) { return MeasurementOperator::from_matrix(to_matrix(a)); });

    m.def("make_operator", py::overload_cast<std::size_t, std::size_t, std::uint64_t>(&make_operator), py::arg("n"),
          py::arg("d"), py::arg("seed"));
    m.def("make_orthonormal_operator", &make_orthonormal_operator, py::arg("n"), py::arg("d"), py::arg("seed"));
    m.def("apply", [](const MeasurementOperator& op, const Array& x) { return to_array(netpgd::apply(op, to_vector(x))); });
    m.def("apply_adjoint",
          [](const MeasurementOperator& op, const Array& r) { return to_array(apply_adjoint(op, to_vector(r))); });
    m.def("apply_magnitude",
          [](const MeasurementOperator& op, const Array& x) { return to_array(apply_magnitude(op, to_vector(x))); });

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_static("cs_defaults", &SolverConfig::cs_defaults)
        .def_static("cpr_defaults", &SolverConfig::cpr_defaults)
        .def_readwrite("eta", &SolverConfig::eta)
        .def_readwrite("max_outer_iters", &SolverConfig::max_outer_iters)
        .def_readwrite("tol", &SolverConfig::tol)
        .def_readwrite("inner_iters", &SolverConfig::inner_iters)
        .def_readwrite("inner_lr", &SolverConfig::inner_lr)
        .def_readwrite("momentum", &SolverConfig::momentum)
        .def_readwrite("carry_optimizer", &SolverConfig::carry_optimizer)
        .def_readwrite("seed", &SolverConfig::seed)
        .def_property(
            "optimizer", [](const SolverConfig& c) { return to_string(c.optimizer); },
            [](SolverConfig& c, const std::string& s) { c.optimizer = parse_optimizer(s); })
        .def("validate", &SolverConfig::validate);

    py::class_<SolverTrace>(m, "SolverTrace")
        .def_property_readonly("image", [](const SolverTrace& t) { return to_array(t.image); })
        .def_property_readonly("initial_image", [](const SolverTrace& t) { return to_array(t.initial_image); })
        .def_readonly("weights", &SolverTrace::weights)
        .def_readonly("converged", &SolverTrace::converged)
        .def_property_readonly("iterations", &SolverTrace::iterations)
        .def_property_readonly("final_loss", &SolverTrace::final_loss)
        .def_property_readonly("records", &records);

    m.def(
        "net_pgd_cs",
        [](const Array& y, const MeasurementOperator& op, const DecoderSpec& spec, const LatentCode& latent,
           const SolverConfig& cfg, const py::object& w0, const py::object& reference) {
            Vector keep;
            const auto ref = opt_reference(reference, false, keep);
            return net_pgd_cs(to_vector(y), op, spec, latent, cfg, opt_weights(w0), ref);
        },
        py::arg("y"), py::arg("op"), py::arg("spec"), py::arg("latent"), py::arg("config") = SolverConfig::cs_defaults(),
        py::arg("w0") = py::none(), py::arg("reference") = py::none());
    m.def(
        "net_pgd_cpr",
        [](const Array& y, const MeasurementOperator& op, const DecoderSpec& spec, const LatentCode& latent,
           const SolverConfig& cfg, const py::object& w0, const py::object& reference) {
            Vector keep;
            const auto ref = opt_reference(reference, true, keep);
            return net_pgd_cpr(to_vector(y), op, spec, latent, cfg, opt_weights(w0), ref);
        },
        py::arg("y"), py::arg("op"), py::arg("spec"), py::arg("latent"),
        py::arg("config") = SolverConfig::cpr_defaults(), py::arg("w0") = py::none(),
        py::arg("reference") = py::none());
    m.def(
        "net_gd",
        [](const Array& y, const MeasurementOperator& op, const std::string& mode, const DecoderSpec& spec,
           const LatentCode& latent, const SolverConfig& cfg, const py::object& w0) {
            MeasurementMode mm;
            if (mode == "linear") mm = MeasurementMode::Linear;
            else if (mode == "magnitude") mm = MeasurementMode::Magnitude;
            else throw Error("unknown measurement mode '" + mode + "' (linear, magnitude)");
            return net_gd(to_vector(y), op, mm, spec, latent, cfg, opt_weights(w0));
        },
        py::arg("y"), py::arg("op"), py::arg("mode"), py::arg("spec"), py::arg("latent"),
        py::arg("config") = SolverConfig::cs_defaults(), py::arg("w0") = py::none());

    py::class_<IstaResult>(m, "IstaResult")
        .def_property_readonly("image", [](const IstaResult& r) { return to_array(r.image); })
        .def_property_readonly("coefficients", [](const IstaResult& r) { return to_array(r.coefficients); })
        .def_readonly("objective", &IstaResult::objective)
        .def_readonly("step", &IstaResult::step);
    m.def(
        "ista_dct",
        [](const Array& y, const MeasurementOperator& op, double lambda, std::size_t iters) {
            return ista_dct(to_vector(y), op, lambda, iters);
        },
        py::arg("y"), py::arg("op"), py::arg("lam"), py::arg("iters") = 1000);
    m.def("lasso_lambda_from_alpha", &lasso_lambda_from_alpha, py::arg("alpha"), py::arg("n"));
    m.def(
        "nmse",
        [](const Array& xhat, const Array& xstar, bool sign_resolve) {
            return nmse(to_vector(xhat), to_vector(xstar), sign_resolve);
        },
        py::arg("xhat"), py::arg("xstar"), py::arg("sign_resolve") = false);

    py::class_<RecOptions>(m, "RecOptions")
        .def(py::init<>())
        .def_readwrite("alpha", &RecOptions::alpha)
        .def_readwrite("trials", &RecOptions::trials)
        .def_readwrite("vectors_per_trial", &RecOptions::vectors_per_trial)
        .def_property(
            "mode", [](const RecOptions& o) { return to_string(o.mode); },
            [](RecOptions& o, const std::string& s) { o.mode = parse_rec_mode(s); });

    py::class_<RecReport>(m, "RecReport")
        .def_readonly("alpha", &RecReport::alpha)
        .def_readonly("trials", &RecReport::trials)
        .def_readonly("pass_rate", &RecReport::pass_rate)
        .def_readonly("vector_pass_rate", &RecReport::vector_pass_rate)
        .def_readonly("min_ratio", &RecReport::min_ratio)
        .def_readonly("max_ratio", &RecReport::max_ratio)
        .def_readonly("discarded", &RecReport::discarded);

    m.def(
        "rec_check",
        [](std::size_t n, const DecoderSpec& spec, const LatentCode& latent, const RecOptions& opt,
           std::uint64_t seed, bool orthonormal) { return rec_check(n, spec, latent, opt, seed, orthonormal); },
        py::arg("n"), py::arg("spec"), py::arg("latent"), py::arg("options") = RecOptions{}, py::arg("seed") = 0,
        py::arg("orthonormal") = false);

    m.def(
        "load_image",
        [](const std::string& path) {
            const ImageVector img = load_image(path);
            return py::make_tuple(to_array(img.pixels), img.height, img.width);
        },
        py::arg("path"));

    m.def(
        "rng_u64",
        [](std::uint64_t seed, std::size_t count) {
            SeededRng rng(seed);
            std::vector<std::uint64_t> out(count);
            for (auto& v : out) v = rng.next_u64();
            return out;
        },
        py::arg("seed"), py::arg("count") = 1);
}
