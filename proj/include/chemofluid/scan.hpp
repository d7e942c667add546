// Randomised inequality scans over smooth Neumann fields.
//
// A trial draws a band-limited Fourier series z on the bounding box and
// removes its normal derivative at the boundary,
//
//     s = z - zeta(phi) phi (grad z . grad phi) / |grad phi|^2,
//     zeta = 1 for |phi| <= delta/2, falling to 0 at |phi| = delta through a
//     C^2 smootherstep,
//
// so grad s . grad phi = 0 on {phi = 0} exactly. Fields are point samples at
// cell centres. Coefficients depend only on (seed, trial), so the same
// continuous fields are seen at every resolution.

#pragma once

#include "chemofluid/diagnostics.hpp"
#include "chemofluid/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace chemofluid {

struct ScanOptions {
    int trials = 100;
    std::uint64_t seed = 1;
    int modes = 3;          ///< highest wave number per axis (k = p pi / box width)
    double cutoff = 0.5;    ///< delta of the normal-correction cutoff
    double c_check = 15.0;  ///< MS and boundary-sign tolerance factor (times h^{1/2})
    double c_mean = 1.0;    ///< c = c_mean + c_spread * s / max|s| for the gradient-Hessian check
    double c_spread = 0.5;
};

/// One random field per (seed, trial). Evaluate with sample().
class RandomNeumannField {
public:
    RandomNeumannField(const LevelSetDomain& domain, std::uint64_t seed, int trial, int modes, double cutoff);

    double operator()(Vec2 p) const;
    /// Point samples at active cell centres, zero elsewhere.
    ScalarField sample(const Mesh& mesh) const;

private:
    double z(Vec2 p, Vec2* grad) const;

    const LevelSetDomain* domain_;
    int modes_;
    double cutoff_;
    double lx_, ly_, x0_, y0_;
    std::vector<double> coeff_; ///< 4 per (p, q): cc, cs, sc, ss
};

struct ScanSummary {
    std::vector<InequalityReport> reports;
    double ms_max = 0;            ///< largest normalised MS violation
    double boundary_max = 0;      ///< largest boundary term / MS-bound scale (signed)
    double grad_hess_max_ratio = 0;  ///< largest LHS / RHS
    double trace_bound_max = 0;   ///< largest |tr H|^2 - 2|H|^2
    int ms_failures = 0;
    int boundary_positive = 0;    ///< trials with boundary term above tolerance
    int boundary_positive_raw = 0; ///< trials with boundary term > 0
    int grad_hess_failures = 0;
    int trace_bound_failures = 0;
};

/// Runs every trial on the mesh. Report ids carry the trial number
/// ("ms_lemma/17"); the time column holds the trial index.
ScanSummary scan_inequalities(const LevelSetDomain& domain, MeshPtr mesh, const KineticsModel& model,
                              const ScanOptions& opt);

} // namespace chemofluid
