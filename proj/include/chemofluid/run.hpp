// Time integration driver with invariant tracking and output files.

#pragma once

#include "chemofluid/config.hpp"
#include "chemofluid/diagnostics.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace chemofluid {

/// A named check. Failing enforced verdicts make the run exit with 2;
/// the rest are informational.
struct Verdict {
    std::string name;
    bool passed = true;
    bool enforced = true;
    double value = 0;
    double tolerance = 0;
    std::string detail;
};

/// Per-step extremes of the conserved and monotone quantities.
struct StepStats {
    long steps = 0;
    double final_time = 0;
    double mass0 = 0;
    double mass_drift = 0;       ///< max |m - m0| / m0
    double c_max0 = 0;
    double c_max_increase = 0;   ///< max (c_max(k) - c_max(k-1)) / c_max0, 0 if never increasing
    double n_min = 0;            ///< smallest n seen on active cells
    double n_max = 0;
    double div_ratio = 0;        ///< max |div u| dt / linear_tol
    double gauge_ratio = 0;      ///< max |mean p| / max |p|
    int max_cg_iterations = 0;
};

struct RunResult {
    std::vector<DiagnosticsRow> rows;
    std::vector<InequalityReport> reports;
    StepStats stats;
    std::vector<Verdict> verdicts;
    ConvergenceVerdict convergence;
    std::map<std::string, double> timings; ///< seconds
    double identity_residual_max = 0;      ///< over interior rows
    int exit_code = 0;

    bool passed() const { return exit_code == 0; }
    /// Summary document (JSON text), also written as summary.json.
    std::string summary_json(const RunConfig& cfg) const;
};

/// Tolerances of the per-step checks.
struct RunTolerances {
    double mass_rel = 1e-8;
    double c_max_rel = 1e-12;
    double div_factor = 10;   ///< |div u| <= div_factor * linear_tol / dt
    double gauge_rel = 1e-12;
};

/// Validates the model on [0, max c0], integrates to end_time (or max_steps)
/// and evaluates diagnostics every output.every steps and at the end. With a
/// non-empty out_dir writes diagnostics.csv, inequalities.csv, summary.json
/// and snapshots/ there. Throws ValidationError, SolverAbort, ConfigError.
RunResult run_simulation(const RunConfig& cfg, const std::string& out_dir, std::ostream* log = nullptr,
                         const RunTolerances& tol = {});

/// Writes content to path through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace chemofluid
