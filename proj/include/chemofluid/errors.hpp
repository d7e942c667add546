// Exception types shared by all modules.
//
// Every error carries a one-line human readable reason. The CLI maps the
// families below onto its exit codes (validation 2, solver abort 3,
// configuration 4).

#pragma once

#include <stdexcept>
#include <string>

namespace chemofluid {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid or unusable domain description (empty interior, no margin, ...).
struct GeometryError : Error {
    using Error::Error;
};

/// Boundary not resolved by the grid (ambiguous cell, too few cells).
struct ResolutionError : GeometryError {
    using GeometryError::GeometryError;
};

/// Level-set gradient vanishes where a normal or curvature is needed.
struct SingularGradientError : GeometryError {
    using GeometryError::GeometryError;
};

/// Fields or per-segment arrays that do not belong to the same grid.
struct GridMismatchError : Error {
    using Error::Error;
};

/// Model or initial data violate the structural assumptions.
struct ValidationError : Error {
    using Error::Error;
};

/// Time stepping cannot continue (CG failure, dt underflow, broken invariant).
struct SolverAbort : Error {
    using Error::Error;
};

/// Malformed configuration file or command-line override.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace chemofluid
