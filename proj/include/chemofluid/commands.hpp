// The command-line verbs as library calls.
//
// Each command prints a short report to `os`, writes its files under
// `out_dir` (nothing when empty) and returns the process exit code:
// 0 pass, 2 validation or verification failure. Errors propagate as
// exceptions; exit_code_for() maps them.

#pragma once

#include "chemofluid/config.hpp"

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace chemofluid {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitConfig = 4;

/// Time integration with diagnostics; see run_simulation().
int command_run(const RunConfig& cfg, const std::string& out_dir, std::ostream& os);

/// Structural assumptions on [0, sup c0]; writes assumptions.csv.
int command_validate_model(const RunConfig& cfg, const std::string& out_dir, std::ostream& os);

/// Classification summary; writes geometry.json and boundary.csv.
int command_check_geometry(const RunConfig& cfg, const std::string& out_dir, std::ostream& os);

/// Convergence study; writes mms.csv. Fails when any observed order is
/// below mms.min_order.
int command_mms(const RunConfig& cfg, const std::string& out_dir, std::ostream& os);

/// Random Neumann-field scan at grid.n; writes inequalities.csv and
/// scan.json. The boundary-sign and gradient-Hessian checks only fail the
/// command on convex domains.
int command_scan(const RunConfig& cfg, const std::string& out_dir, std::ostream& os);

/// Dispatch by verb name: run, validate-model, check-geometry, mms,
/// scan-inequalities. Throws ConfigError for an unknown verb.
int run_command(const std::string& verb, const RunConfig& cfg, const std::string& out_dir, std::ostream& os);

const std::vector<std::string>& command_names();

/// ConfigError and GeometryError give 4, ValidationError 2, SolverAbort 3,
/// anything else 1.
int exit_code_for(const std::exception& e);

} // namespace chemofluid
