#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "malab/masolver.hpp"
#include "malab/metrics.hpp"
#include "malab/sections.hpp"

namespace malab {

/// Experiment settings, read from a single JSON document (see configs/).
struct ExperimentConfig {
    ProfileParams profile;
    std::vector<double> r_list{0.2, 0.1, 0.05, 0.025, 0.0125};
    double alpha = 0.5;
    bool alpha_rule = false;  // alpha_r = alpha_c / |log r|
    double alpha_c = 1.0;
    std::vector<double> K_list{2.0, 4.0, 8.0};
    double K = 4.0;
    SolverConfig solver;
    int grid_n = 129;
    int refine = 4;
    int rhs_nx = 100;  // log-spaced rhs samples per axis
    int rhs_ny = 400;
    std::string output_dir = "out";
    std::uint64_t seed = 0;

    static ExperimentConfig parse(const std::string& json_text);
    static ExperimentConfig load(const std::string& path);
    std::string dump() const;
    /// Throws ConfigError on a bad r_list or a grid too coarse for the smallest box.
    void validate() const;
    double alpha_for(double r) const;
    double fine_spacing() const { return 2.0 / (grid_n - 1) / refine; }
};

/// Smoothed profile used by the scaling experiments when no profile is given.
ProfileParams experiment_profile(double gamma);

struct RhsNorm {
    double sup = 0.0;
    double seminorm = 0.0;
    double norm = 0.0;  // sup + seminorm
    HolderEstimate witness;
};

/// ||f_r||_{C^alpha} on the unit box from log-spaced samples of the first
/// quadrant (f_r is even in each variable, which makes this exact for the
/// sampled set).
RhsNorm rhs_holder_norm(const PerturbedRHS& fr, double alpha, int nx, int ny, std::uint64_t seed = 0);

struct RMeasurement {
    double r = 0.0;
    double alpha = 0.5;
    RhsNorm rhs;
    double hessian_seminorm = 0.0;
    HolderEstimate hessian_witness;
    double abp_gap = 0.0;     // sup |u_{r,h} - u_h| on the coarse unknowns
    double grid_error = 0.0;  // sup |u_h - u| on the coarse unknowns
    std::map<double, double> window_osc;  // K -> osc of the K-rescaled d22 on I/2
    SampleSet d22;
    SolveReport coarse, fine;
};

struct FitEntry {
    std::string name;
    std::string file;
    ExponentFit fit;
};

struct ExperimentReport {
    std::string experiment;
    ExperimentConfig config;
    RhsBounds bounds;
    std::vector<RMeasurement> rows;
    std::vector<FitEntry> fits;
    std::map<std::string, double> scalars;
    std::map<std::string, bool> checks;

    const FitEntry& fit(const std::string& name) const;
    /// Writes per-quantity CSVs, the long-format CSV and summary.json into config.output_dir.
    void write() const;
};

/// Per-r sweep measuring ||f_r||, the Hessian seminorm on I/2 and the ABP gap.
ExperimentReport run_sharpness(const ExperimentConfig& config);
/// Same sweep with alpha_r = c / |log r|.
ExperimentReport run_exp_alpha(const ExperimentConfig& config);
/// Section geometry, strict convexity and blow-up traces for the model and a smooth solve.
ExperimentReport run_sections(const ExperimentConfig& config);

struct VerifyResult {
    std::size_t fits_checked = 0;
    double max_deviation = 0.0;
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

/// Recomputes every fit listed in <dir>/summary.json from its CSV.
VerifyResult verify_report(const std::string& dir, double tol = 1e-12);

}  // namespace malab
