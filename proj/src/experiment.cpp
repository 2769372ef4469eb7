#include "netpgd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "netpgd/image.hpp"
#include "netpgd/oracles.hpp"

namespace netpgd {

namespace fs = std::filesystem;

std::string to_string(Task task) {
    switch (task) {
        case Task::CompressiveSensing: return "cs";
        case Task::PhaseRetrieval: return "cpr";
        case Task::Project: return "project";
        case Task::RecCheck: return "rec-check";
    }
    return "?";
}

std::string to_string(SolverKind solver) {
    switch (solver) {
        case SolverKind::NetPgd: return "net-pgd";
        case SolverKind::NetGd: return "net-gd";
        case SolverKind::Ista: return "ista";
    }
    return "?";
}

Task parse_task(const std::string& text) {
    if (text == "cs") return Task::CompressiveSensing;
    if (text == "cpr") return Task::PhaseRetrieval;
    if (text == "project") return Task::Project;
    if (text == "rec-check") return Task::RecCheck;
    throw Error("unknown task '" + text + "' (expected cs, cpr, project or rec-check)");
}

SolverKind parse_solver(const std::string& text) {
    if (text == "net-pgd") return SolverKind::NetPgd;
    if (text == "net-gd") return SolverKind::NetGd;
    if (text == "ista") return SolverKind::Ista;
    throw Error("unknown solver '" + text + "' (expected net-pgd, net-gd or ista)");
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::istringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T out{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw Error("config: bad value for '" + key + "': '" + text + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
    if (text == "0" || text == "false" || text == "off" || text == "no") return false;
    throw Error("config: bad flag for '" + key + "': '" + text + "'");
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string fmt_ratio(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

struct Cell {
    double ratio;
    std::uint64_t seed;
    SolverKind solver;
};

struct CellOutput {
    ResultRow row;
    Vector image;
};

// Independent streams per role, all derived from the cell's seed. The
// operator stream ignores the ratio, so operators at different ratios share
// their leading rows.
enum StreamRole : std::uint64_t { kOperatorStream = 1, kInitStream = 2, kTruthStream = 3 };

struct Instance {
    const ExperimentConfig& cfg;
    const LatentCode& latent;
    const Vector* image;  // null for synthetic problems
};

Vector ground_truth(const Instance& inst, std::uint64_t seed) {
    if (inst.image) return *inst.image;
    SeededRng rng = SeededRng::derive(seed, kTruthStream);
    return generate(inst.cfg.spec, init_weights(inst.cfg.spec, rng), inst.latent);
}

CellOutput run_cell(const Instance& inst, const Cell& cell) {
    const ExperimentConfig& cfg = inst.cfg;
    CellOutput out;
    ResultRow& row = out.row;
    row.task = to_string(cfg.task);
    row.solver = cfg.task == Task::Project ? "project" : to_string(cell.solver);
    row.ratio = cell.ratio;
    row.seed = cell.seed;
    const auto start = std::chrono::steady_clock::now();
    try {
        const Vector truth = ground_truth(inst, cell.seed);
        SolverConfig scfg = cfg.solver;
        scfg.seed = SeededRng::derive(cell.seed, kInitStream).next_u64();

        if (cfg.task == Task::Project) {
            SeededRng rng(scfg.seed);
            const ProjectionResult proj =
                project(cfg.spec, inst.latent, truth, init_weights(cfg.spec, rng), scfg.projection());
            out.image = generate(cfg.spec, proj.weights, inst.latent);
            row.nmse = nmse(out.image, truth, false);
            row.final_loss = proj.fit_loss;
            row.iters = scfg.inner_iters;
        } else {
            const std::size_t d = cfg.spec.output_dim();
            row.n = measurement_count(cell.ratio, d);
            SeededRng op_rng = SeededRng::derive(cell.seed, kOperatorStream);
            const MeasurementOperator op = make_operator(row.n, d, op_rng);
            const bool magnitude = cfg.task == Task::PhaseRetrieval;
            const Vector y = magnitude ? apply_magnitude(op, truth) : netpgd::apply(op, truth);

            if (cell.solver == SolverKind::Ista) {
                const IstaResult res =
                    ista_dct(y, op, lasso_lambda_from_alpha(cfg.ista_alpha, row.n), cfg.ista_iters);
                out.image = res.image;
                row.iters = cfg.ista_iters;
                const Vector ax = netpgd::apply(op, res.image);
                row.final_loss = squared_distance(ax, y);
                row.nmse = nmse(res.image, truth, false);
            } else {
                const Reference ref{truth, magnitude};
                SolverTrace trace;
                if (cell.solver == SolverKind::NetPgd) {
                    trace = magnitude ? net_pgd_cpr(y, op, cfg.spec, inst.latent, scfg, std::nullopt, ref)
                                      : net_pgd_cs(y, op, cfg.spec, inst.latent, scfg, std::nullopt, ref);
                } else {
                    trace = net_gd(y, op, magnitude ? MeasurementMode::Magnitude : MeasurementMode::Linear, cfg.spec,
                                   inst.latent, scfg, std::nullopt, ref);
                }
                out.image = trace.image;
                row.iters = trace.iterations();
                row.final_loss = trace.final_loss();
                row.initial_loss = trace.records.front().measurement_loss;
                row.nmse = nmse(trace.image, truth, magnitude);
                if (norm2(trace.image) > 0.0) row.delta_i = delta_i_stat(trace.initial_image, trace.image);
            }
        }
    } catch (const std::exception& e) {
        row.status = "error: " + csv_safe(e.what());
        row.nmse = std::numeric_limits<double>::quiet_NaN();
    }
    if (cfg.record_timing)
        row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << contents;
}

}  // namespace

std::size_t measurement_count(double ratio, std::size_t d) {
    return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(d)));
}

// --- config ----------------------------------------------------------------

void ExperimentConfig::validate() const {
    spec.validate();
    solver.validate();
    require(!seeds.empty(), "config: at least one seed is required");
    require(threads >= 1, "config: threads must be >= 1");
    if (task == Task::Project) return;
    if (task == Task::RecCheck) {
        require(!rec_n.empty() || !ratios.empty(), "config: rec-check needs an n-grid or ratios");
        for (std::size_t n : rec_n) require(n >= 1, "config: rec_n entries must be >= 1");
        return;
    }
    require(!ratios.empty(), "config: ratio list is empty");
    for (double f : ratios)
        require(f > 0.0 && f <= 3.0, "config: ratio " + fmt(f) + " outside (0, 3]");
    for (double f : ratios)
        require(measurement_count(f, spec.output_dim()) >= 1, "config: ratio " + fmt(f) + " gives zero measurements");
    require(!solvers.empty(), "config: no solver selected");
    for (SolverKind s : solvers)
        require(!(s == SolverKind::Ista && task != Task::CompressiveSensing),
                "config: the ista baseline only supports the cs task");
    if (std::find(solvers.begin(), solvers.end(), SolverKind::Ista) != solvers.end())
        require(ista_alpha > 0.0 && ista_iters >= 1, "config: ista needs alpha > 0 and iters >= 1");
    require(synthetic || !image_path.empty(), "config: need an image path or synthetic=true");
}

void ExperimentConfig::apply(const std::string& raw_key, const std::string& raw_value) {
    std::string key = trim(raw_key);
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string value = trim(raw_value);
    if (key == "task") {
        const Task t = parse_task(value);
        if (t == Task::PhaseRetrieval && task != Task::PhaseRetrieval && solver.eta == SolverConfig{}.eta)
            solver.eta = SolverConfig::cpr_defaults().eta;
        task = t;
    } else if (key == "image") {
        image_path = value;
    } else if (key == "synthetic") {
        synthetic = parse_bool(key, value);
    } else if (key == "ratios" || key == "ratio") {
        for (const auto& item : split_list(value)) ratios.push_back(parse_number<double>(key, item));
    } else if (key == "seeds" || key == "seed") {
        for (const auto& item : split_list(value)) {
            if (auto dash = item.find('-'); dash != std::string::npos && dash > 0) {
                const auto lo = parse_number<std::uint64_t>(key, item.substr(0, dash));
                const auto hi = parse_number<std::uint64_t>(key, item.substr(dash + 1));
                require(lo <= hi && hi - lo < 100000, "config: bad seed range '" + item + "'");
                for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
            } else {
                seeds.push_back(parse_number<std::uint64_t>(key, item));
            }
        }
    } else if (key == "spec") {
        spec = DecoderSpec::load(value);
    } else if (key == "solver" || key == "solvers") {
        if (!solvers_explicit) solvers.clear();
        solvers_explicit = true;
        for (const auto& item : split_list(value)) solvers.push_back(parse_solver(item));
    } else if (key == "eta") {
        solver.eta = parse_number<double>(key, value);
    } else if (key == "outer_iters") {
        solver.max_outer_iters = parse_number<std::size_t>(key, value);
    } else if (key == "tol") {
        solver.tol = parse_number<double>(key, value);
    } else if (key == "inner_iters") {
        solver.inner_iters = parse_number<std::size_t>(key, value);
    } else if (key == "inner_lr") {
        solver.inner_lr = parse_number<double>(key, value);
    } else if (key == "momentum") {
        solver.momentum = parse_number<double>(key, value);
    } else if (key == "optimizer") {
        solver.optimizer = parse_optimizer(value);
    } else if (key == "carry_optimizer") {
        solver.carry_optimizer = parse_bool(key, value);
    } else if (key == "latent_seed") {
        latent_seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "ista_alpha") {
        ista_alpha = parse_number<double>(key, value);
    } else if (key == "ista_iters") {
        ista_iters = parse_number<std::size_t>(key, value);
    } else if (key == "out_dir") {
        out_dir = value;
    } else if (key == "write_images") {
        write_images = parse_bool(key, value);
    } else if (key == "timing") {
        record_timing = parse_bool(key, value);
    } else if (key == "threads") {
        threads = parse_number<std::size_t>(key, value);
    } else if (key == "rec_n" || key == "n_grid") {
        for (const auto& item : split_list(value)) rec_n.push_back(parse_number<std::size_t>(key, item));
    } else if (key == "alpha" || key == "rec_alpha") {
        rec.alpha = parse_number<double>(key, value);
    } else if (key == "trials" || key == "rec_trials") {
        rec.trials = parse_number<std::size_t>(key, value);
    } else if (key == "vectors_per_trial") {
        rec.vectors_per_trial = parse_number<std::size_t>(key, value);
    } else if (key == "rec_mode" || key == "mode") {
        rec.mode = parse_rec_mode(value);
    } else if (key == "orthonormal") {
        rec_orthonormal = parse_bool(key, value);
    } else {
        throw Error("config: unknown key '" + raw_key + "'");
    }
}

void ExperimentConfig::apply_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("config: expected key=value, got '" + line + "'");
        apply(line.substr(0, eq), line.substr(eq + 1));
    }
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    ExperimentConfig cfg;
    cfg.apply_text(buf.str());
    return cfg;
}

// --- experiment ------------------------------------------------------------

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    require(cfg.task != Task::RecCheck, "run_experiment: use rec_check_cmd for the rec-check task");
    cfg.validate();

    std::optional<Vector> image;
    if (!cfg.synthetic) image = load_image(cfg.image_path, cfg.spec).pixels;
    const LatentCode latent = make_latent(cfg.spec, cfg.latent_seed);
    const Instance inst{cfg, latent, image ? &*image : nullptr};

    std::vector<std::uint64_t> seeds = cfg.seeds;
    std::sort(seeds.begin(), seeds.end());
    std::vector<Cell> cells;
    if (cfg.task == Task::Project) {
        for (std::uint64_t seed : seeds) cells.push_back({0.0, seed, SolverKind::NetPgd});
    } else {
        std::vector<double> ratios = cfg.ratios;
        std::sort(ratios.begin(), ratios.end());
        for (double f : ratios)
            for (SolverKind s : cfg.solvers)
                for (std::uint64_t seed : seeds) cells.push_back({f, seed, s});
    }

    std::vector<CellOutput> outputs(cells.size());
    if (cfg.threads <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) outputs[i] = run_cell(inst, cells[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < std::min(cfg.threads, cells.size()); ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < cells.size(); i = next++) outputs[i] = run_cell(inst, cells[i]);
            });
        }
        for (auto& t : workers) t.join();
    }

    std::vector<ResultRow> rows;
    rows.reserve(outputs.size());
    for (const auto& o : outputs) rows.push_back(o.row);

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_file(dir / "results.csv", format_results_csv(rows));
    write_file(dir / "summary.csv", format_summary_csv(rows));
    if (cfg.write_images) {
        const std::size_t side = cfg.spec.output_side();
        for (const auto& o : outputs) {
            if (o.image.size() != side * side) continue;
            const std::string name = o.row.task + "_" + o.row.solver + "_f" + fmt_ratio(o.row.ratio) + "_s" +
                                     std::to_string(o.row.seed) + ".pgm";
            write_pgm((dir / name).string(), ImageVector{o.image, side, side});
        }
    }
    return rows;
}

std::string format_results_csv(const std::vector<ResultRow>& rows) {
    std::string out = std::string(kResultsHeader) + "\n";
    for (const auto& r : rows) {
        out += r.task + "," + r.solver + "," + fmt_ratio(r.ratio) + "," + std::to_string(r.seed) + "," +
               std::to_string(r.n) + "," + fmt(r.nmse) + "," + fmt(r.final_loss) + "," + std::to_string(r.iters) +
               "," + fmt(r.wall_time_s) + "," + r.status + "\n";
    }
    return out;
}

std::string format_summary_csv(const std::vector<ResultRow>& rows) {
    struct Group {
        std::string task, solver;
        double ratio;
        std::size_t n;
        std::size_t runs = 0;
        std::vector<double> nmse;
        double iters = 0.0;
    };
    std::vector<Group> groups;
    for (const auto& r : rows) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.task == r.task && g.solver == r.solver && g.ratio == r.ratio;
        });
        if (it == groups.end()) {
            groups.push_back(Group{r.task, r.solver, r.ratio, r.n, 0, {}, 0.0});
            it = groups.end() - 1;
        }
        ++it->runs;
        if (r.status == "ok") {
            it->nmse.push_back(r.nmse);
            it->iters += static_cast<double>(r.iters);
        }
    }
    std::string out = "task,solver,ratio,n,runs,ok,mean_nmse,std_nmse,mean_iters\n";
    for (const auto& g : groups) {
        const std::size_t ok = g.nmse.size();
        double mean = std::numeric_limits<double>::quiet_NaN(), sd = 0.0;
        if (ok > 0) {
            mean = 0.0;
            for (double v : g.nmse) mean += v;
            mean /= static_cast<double>(ok);
            if (ok > 1) {
                for (double v : g.nmse) sd += (v - mean) * (v - mean);
                sd = std::sqrt(sd / static_cast<double>(ok - 1));
            }
        }
        out += g.task + "," + g.solver + "," + fmt_ratio(g.ratio) + "," + std::to_string(g.n) + "," +
               std::to_string(g.runs) + "," + std::to_string(ok) + "," + fmt(mean) + "," + fmt(sd) + "," +
               fmt(ok ? g.iters / static_cast<double>(ok) : 0.0) + "\n";
    }
    return out;
}

// --- rec-check ---------------------------------------------------------------

std::vector<RecGridRow> rec_check_cmd(const ExperimentConfig& cfg) {
    require(cfg.task == Task::RecCheck, "rec_check_cmd: config task must be rec-check");
    cfg.validate();
    const std::size_t d = cfg.spec.output_dim();
    std::vector<std::size_t> grid = cfg.rec_n;
    if (grid.empty())
        for (double f : cfg.ratios) grid.push_back(measurement_count(f, d));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const LatentCode latent = make_latent(cfg.spec, cfg.latent_seed);
    const std::uint64_t seed = cfg.seeds.front();
    std::vector<RecGridRow> rows;
    for (std::size_t n : grid)
        rows.push_back({n, rec_check(n, cfg.spec, latent, cfg.rec, seed, cfg.rec_orthonormal)});
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_file(dir / "rec.csv", format_rec_csv(rows, cfg.rec.mode));
    return rows;
}

std::string format_rec_csv(const std::vector<RecGridRow>& rows, RecMode mode) {
    std::string out = "n,alpha,mode,trials,vectors_per_trial,pass_rate,vector_pass_rate,min_ratio,max_ratio,discarded\n";
    for (const auto& r : rows) {
        const RecReport& rep = r.report;
        out += std::to_string(r.n) + "," + fmt(rep.alpha) + "," + to_string(mode) + "," + std::to_string(rep.trials) +
               "," + std::to_string(rep.vectors_per_trial) + "," + fmt(rep.pass_rate) + "," +
               fmt(rep.vector_pass_rate) + "," + fmt(rep.min_ratio) + "," + fmt(rep.max_ratio) + "," +
               std::to_string(rep.discarded) + "\n";
    }
    return out;
}

}  // namespace netpgd
