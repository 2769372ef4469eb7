#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "netpgd/decoder.hpp"
#include "netpgd/measurements.hpp"
#include "netpgd/solvers.hpp"

namespace netpgd {

enum class Task { CompressiveSensing, PhaseRetrieval, Project, RecCheck };
enum class SolverKind { NetPgd, NetGd, Ista };

std::string to_string(Task task);
std::string to_string(SolverKind solver);
Task parse_task(const std::string& text);
SolverKind parse_solver(const std::string& text);

struct ExperimentConfig {
    Task task = Task::CompressiveSensing;
    std::string image_path;
    bool synthetic = false;  ///< ground truth drawn from the decoder range instead of an image
    std::vector<double> ratios;
    std::vector<std::uint64_t> seeds;
    DecoderSpec spec = DecoderSpec::mnist();
    std::vector<SolverKind> solvers{SolverKind::NetPgd};
    SolverConfig solver = SolverConfig::cs_defaults();
    std::uint64_t latent_seed = 0;
    double ista_alpha = 1e-5;
    std::size_t ista_iters = 1000;
    std::string out_dir = "results";
    bool write_images = true;
    bool record_timing = true;  ///< false writes wall_time_s as 0 for byte-stable output
    std::size_t threads = 1;

    // rec-check
    std::vector<std::size_t> rec_n;  ///< empty: derived from ratios
    RecOptions rec;
    bool rec_orthonormal = false;

    /// Set once a solver key is applied; the first one replaces the default.
    bool solvers_explicit = false;

    void validate() const;

    /// key=value lines; list keys (ratios, seeds, solver, rec_n) accept
    /// repeated keys and comma-separated values. Unknown keys are errors.
    void apply(const std::string& key, const std::string& value);
    void apply_text(const std::string& text);
    static ExperimentConfig load(const std::string& path);
};

/// One (ratio, seed, solver) cell. delta_i and initial_loss are kept in
/// memory only.
struct ResultRow {
    std::string task;
    std::string solver;
    double ratio = 0.0;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    double nmse = 0.0;
    double final_loss = 0.0;
    std::size_t iters = 0;
    double wall_time_s = 0.0;
    std::string status = "ok";
    double delta_i = 0.0;
    double initial_loss = 0.0;  ///< measurement loss of the starting image
};

inline constexpr const char* kResultsHeader = "task,solver,ratio,seed,n,nmse,final_loss,iters,wall_time_s,status";

/// n = round(f * d)
std::size_t measurement_count(double ratio, std::size_t d);

/// Runs every (ratio, seed, solver) cell of a cs / cpr / project config,
/// writes results.csv, summary.csv and reconstructions into out_dir, and
/// returns rows in file order. Solver failures become rows with a non-ok
/// status; configuration errors throw before any work starts.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

std::string format_results_csv(const std::vector<ResultRow>& rows);
std::string format_summary_csv(const std::vector<ResultRow>& rows);

struct RecGridRow {
    std::size_t n = 0;
    RecReport report;
};

/// REC reports over an n-grid with coupled operators and shared weight draws;
/// writes rec.csv into out_dir.
std::vector<RecGridRow> rec_check_cmd(const ExperimentConfig& cfg);
std::string format_rec_csv(const std::vector<RecGridRow>& rows, RecMode mode);

}  // namespace netpgd
