#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "grb/csv.hpp"
#include "grb/greedy.hpp"

namespace grb {

// Configuration-driven experiment description, parsed from a single
// JSON document. Unset fields fall back to per-problem defaults.
struct ExperimentConfig {
    std::string problem;  // manifold-1d | manifold-2d | manifold-3d | convdiff | reacdiff
    std::vector<std::string> activations{"exp"};
    std::vector<int> n_values{4, 8};
    int l_max = 4;
    Schedule m1{3.0, 0.0};
    Schedule m2{5.0, 0.0};
    std::vector<int> manifold_dims;   // parameter grid defining M_K (approx studies)
    std::vector<int> test_dims;       // rom-eval test grid
    std::vector<int> training_dims;   // greedy training grid
    double eps_tol = 1e-5;
    int max_iterations = 100;
    std::string criterion = "relative-output";
    std::vector<std::vector<double>> initial_sample;  // empty -> default corners
    int grid_points = 0;              // manifold spatial resolution override
    int mesh_nx = 32, mesh_ny = 32;   // convdiff mesh
    int mesh_resolution = 3;          // reacdiff patch multiplier
    int degree = 3;
    bool store_bases = true;
    bool baseline = true;             // rom-eval: also evaluate standard RB
    std::string artifact;             // rom-eval input / greedy output name
    unsigned seed = 0;
    std::filesystem::path out_dir = ".";

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    // Hash of the canonical JSON form; stamped on every CSV row.
    std::string hash() const;
};

// Long-form result rows shared by all studies; approx studies also carry
// the POD eigenvalue spectra of every space they build.
struct StudyResult {
    CsvTable table;
    std::optional<CsvTable> spectra;

    StudyResult();
    void add(const std::string& study, const std::string& problem, const std::string& activation,
             int n, int l, int m1, int m2, const std::string& metric, double value,
             double seconds, const std::string& config_hash);
    double value_of(const std::string& activation, int n, const std::string& metric) const;
    void write(const std::filesystem::path& path) const { table.write(path); }
};

// Convergence of the worst-case manifold approximation error for the
// standard and generative spaces (analytic manifold problems only).
StudyResult run_approx_study(const ExperimentConfig& cfg);

struct GreedyRunOutput {
    GreedyResult result;
    std::filesystem::path trace_csv;
    std::filesystem::path artifact;
};

// Greedy sampling on a finite element problem; writes the trace CSV and
// the final artifact under cfg.out_dir.
GreedyRunOutput run_greedy(const ExperimentConfig& cfg);

// True errors and two-level estimates of a reduced model over a test
// grid, optionally with a standard-RB baseline built from the stored
// sample. The model comes from cfg.artifact or is supplied in memory.
StudyResult run_rom_eval(const ExperimentConfig& cfg, const ReducedModel& model,
                         const FullOrderModel& fom);
StudyResult run_rom_eval(const ExperimentConfig& cfg);

// Artifact-only online query; prints a deterministic record plus a
// timing line. Returns a process exit code (0 ok, 2 domain, 3 artifact).
int online_query(const std::filesystem::path& artifact, const Eigen::VectorXd& mu,
                 std::ostream& out);

// Pretty-prints a validated artifact header. Exit-code semantics as above.
int inspect_artifact(const std::filesystem::path& artifact, std::ostream& out);

// The finite element model named by the config (convdiff or reacdiff).
FullOrderModel build_fom_from_config(const ExperimentConfig& cfg);

}  // namespace grb
