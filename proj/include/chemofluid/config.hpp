// Run configuration: flat `key = value` text with dotted keys.
//
// Lines are `key = value`; `#` starts a comment; blank lines are ignored.
// Unknown keys, duplicate keys and malformed values raise ConfigError with
// the line number. Functions of c are written `name(arg, ...)`:
// constant(a), polynomial(c0, c1, ...), saturating(a, b) = a s/(1 + b s),
// decaying(a, b) = a/(1 + b s). Lists are comma separated.

#pragma once

#include "chemofluid/geometry.hpp"
#include "chemofluid/initial.hpp"
#include "chemofluid/mms.hpp"
#include "chemofluid/model.hpp"
#include "chemofluid/scan.hpp"
#include "chemofluid/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace chemofluid {

struct DomainSpec {
    std::string shape = "disk"; ///< disk | annulus | star | samples
    double radius = 1.0;
    double center_x = 0.0;
    double center_y = 0.0;
    double inner = 0.5;
    double outer = 1.0;
    int k = 3;
    double amplitude = 0.4;
    double base = 1.0;
    std::string path;           ///< grid file with a node block named "phi"

    LevelSetDomain build() const;
    /// Disk only; everything else is treated as non-convex.
    bool convex() const { return shape == "disk"; }
};

struct FunctionSpec {
    std::string kind = "constant";
    std::vector<double> args{1.0};

    ScalarFunction build() const;
    std::string text() const;
};

struct ModelSpec {
    FunctionSpec chi{"constant", {1.0}};
    FunctionSpec f{"polynomial", {0.0, 1.0}};
    double gravity = 1.0;
    double kappa_ns = 0.0;
    int validate_samples = 10000;

    KineticsModel build() const;
};

struct OutputSpec {
    std::string dir = "out";
    int every = 10;          ///< steps between diagnostics rows
    int snapshot_every = 0;  ///< steps between checkpoints, 0 = none
};

struct DiagnosticsSpec {
    bool enabled = true;
    double c_floor = 0.0;    ///< 0 selects 1e-10 max(1, max c0)
    double c_check = 15.0;   ///< MS / boundary-sign factor on h^{1/2}
    bool ms = true;
    bool boundary_sign = true;
    bool gradient_hessian = true;
    bool trace_bound = true;
    double energy_slack = 1e-6;
};

struct RunConfig {
    std::string name = "run";
    std::uint64_t seed = 1;
    DomainSpec domain;
    int grid_n = 64;         ///< cells per unit length, h = 1 / grid_n
    ModelSpec model;
    InitialData init;
    SolverConfig solver;
    long max_steps = 0;      ///< 0 = run to end_time
    OutputSpec output;
    DiagnosticsSpec diagnostics;
    ScanOptions scan;
    MmsOptions mms;

    double h() const { return 1.0 / grid_n; }
    /// Cross-field checks; throws ConfigError.
    void validate() const;
};

/// Parses configuration text. `origin` names the source in messages.
RunConfig parse_config(const std::string& text, const std::string& origin = "config");
RunConfig load_config(const std::string& path);

/// Every accepted key, in documentation order.
const std::vector<std::string>& config_keys();

} // namespace chemofluid
