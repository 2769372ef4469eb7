// netpgd: experiment runner for decoder-prior reconstruction.
//
//   netpgd cs --image data/digit0.pgm --ratios 0.1,0.25 --seeds 0-9 --solver net-pgd,net-gd,ista
//   netpgd cpr --image data/digit0.pgm --ratios 0.5 --seeds 0-9
//   netpgd project --image data/digit0.pgm --inner-iters 3000
//   netpgd rec-check --spec configs/rec_2layer.spec --n-grid 20,50,100,200,400

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "netpgd/experiment.hpp"

namespace {

struct Flags {
    std::string config;
    std::string image;
    std::string ratios;
    std::string seeds;
    std::string solver;
    std::string eta;
    std::string outer_iters;
    std::string inner_iters;
    std::string inner_lr;
    std::string out_dir;
    std::string spec;
    std::string n_grid;
    std::string alpha;
    std::string trials;
    std::string mode;
    std::string threads;
    std::vector<std::string> overrides;
    bool synthetic = false;
    bool orthonormal = false;
    bool no_timing = false;
    bool no_images = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "key=value config file; flags override its values");
    cmd->add_option("--image", f.image, "ground-truth image (binary PGM)");
    cmd->add_flag("--synthetic", f.synthetic, "draw ground truth from the decoder range instead of an image");
    cmd->add_option("--seeds", f.seeds, "seeds, comma list or ranges like 0-9");
    cmd->add_option("--spec", f.spec, "decoder spec file");
    cmd->add_option("--out-dir", f.out_dir, "output directory");
    cmd->add_option("--eta", f.eta, "outer gradient step");
    cmd->add_option("--outer-iters", f.outer_iters, "maximum outer iterations");
    cmd->add_option("--inner-iters", f.inner_iters, "projection steps per outer iteration");
    cmd->add_option("--inner-lr", f.inner_lr, "projection learning rate");
    cmd->add_option("--threads", f.threads, "worker threads");
    cmd->add_flag("--no-timing", f.no_timing, "write wall_time_s as 0 so results.csv is byte-reproducible");
    cmd->add_flag("--no-images", f.no_images, "skip writing reconstruction PGMs");
    cmd->add_option("--set", f.overrides, "extra config entry key=value, applied last (repeatable)");
}

netpgd::ExperimentConfig build_config(const std::string& task, const Flags& f) {
    netpgd::ExperimentConfig cfg;
    if (!f.config.empty()) cfg = netpgd::ExperimentConfig::load(f.config);
    cfg.apply("task", task);
    auto set = [&](const char* key, const std::string& value) {
        if (!value.empty()) cfg.apply(key, value);
    };
    // List flags replace whatever the config file listed.
    if (!f.ratios.empty()) cfg.ratios.clear();
    if (!f.seeds.empty()) cfg.seeds.clear();
    if (!f.solver.empty()) cfg.solvers_explicit = false;
    if (!f.n_grid.empty()) cfg.rec_n.clear();
    set("spec", f.spec);
    set("image", f.image);
    set("ratios", f.ratios);
    set("seeds", f.seeds);
    set("solver", f.solver);
    set("eta", f.eta);
    set("outer_iters", f.outer_iters);
    set("inner_iters", f.inner_iters);
    set("inner_lr", f.inner_lr);
    set("out_dir", f.out_dir);
    set("threads", f.threads);
    set("n_grid", f.n_grid);
    set("alpha", f.alpha);
    set("trials", f.trials);
    set("rec_mode", f.mode);
    if (f.synthetic) cfg.synthetic = true;
    if (f.orthonormal) cfg.rec_orthonormal = true;
    if (f.no_timing) cfg.record_timing = false;
    if (f.no_images) cfg.write_images = false;
    for (const auto& entry : f.overrides) cfg.apply_text(entry);
    if (cfg.seeds.empty()) cfg.seeds.push_back(0);
    return cfg;
}

int run_solver_task(const netpgd::ExperimentConfig& cfg) {
    const auto rows = netpgd::run_experiment(cfg);
    std::cout << netpgd::format_summary_csv(rows);
    std::size_t failed = 0;
    for (const auto& r : rows)
        if (r.status != "ok") ++failed;
    if (failed) std::cerr << failed << " of " << rows.size() << " runs failed; see results.csv\n";
    std::cerr << "wrote " << cfg.out_dir << "/results.csv and summary.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Image reconstruction from compressive and magnitude-only Gaussian measurements "
                 "with an untrained decoder prior"};
    app.require_subcommand(1);
    Flags f;

    auto* cs = app.add_subcommand("cs", "compressive sensing y = Ax");
    auto* cpr = app.add_subcommand("cpr", "compressive phase retrieval y = |Ax|");
    auto* proj = app.add_subcommand("project", "fit the decoder to an image (no measurements)");
    auto* rec = app.add_subcommand("rec-check", "Monte-Carlo set-restricted eigenvalue check over an n-grid");
    for (auto* cmd : {cs, cpr, proj, rec}) add_common(cmd, f);
    for (auto* cmd : {cs, cpr}) {
        cmd->add_option("--ratios", f.ratios, "compression ratios n/d, comma separated");
        cmd->add_option("--solver", f.solver, "net-pgd, net-gd, ista (comma separated)");
    }
    rec->add_option("--ratios", f.ratios, "ratios used when --n-grid is not given");
    rec->add_option("--n-grid", f.n_grid, "measurement counts, comma separated");
    rec->add_option("--alpha", f.alpha, "distortion parameter in (0, 1)");
    rec->add_option("--trials", f.trials, "trials per n");
    rec->add_option("--mode", f.mode, "range or difference");
    rec->add_flag("--orthonormal", f.orthonormal, "use operators with orthonormal rows");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cs->parsed()) return run_solver_task(build_config("cs", f));
        if (cpr->parsed()) return run_solver_task(build_config("cpr", f));
        if (proj->parsed()) return run_solver_task(build_config("project", f));
        if (rec->parsed()) {
            const auto cfg = build_config("rec-check", f);
            const auto rows = netpgd::rec_check_cmd(cfg);
            std::cout << netpgd::format_rec_csv(rows, cfg.rec.mode);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
