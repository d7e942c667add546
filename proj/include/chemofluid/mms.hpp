// Manufactured solutions on the unit disk.
//
// With E = amplitude e^{-t}, w = r^2 (2 - r^2) and r^2 = x^2 + y^2:
//
//     n = 1 + E (w + x (3 - r^2) / 2)
//     c = 1 + E (w - y (3 - r^2) / 2)
//     stream = A e^{-t} (1 - r^2)^2,   u = (d_y stream, -d_x stream)
//     p = 0.1 e^{-t} x y
//
// n and c satisfy the Neumann condition and u vanishes on r = 1. The heat
// case keeps only the c equation (chi = 0, f = 0, no fluid, n = 1).

#pragma once

#include "chemofluid/solver.hpp"

#include <array>
#include <string>
#include <vector>

namespace chemofluid {

enum class MmsCase { heat, coupled };

struct MmsOptions {
    MmsCase kind = MmsCase::coupled;
    std::vector<int> resolutions{16, 32, 64}; ///< cells per unit length
    double end_time = 0.2;
    double dt_per_h = 0.25; ///< dt = dt_per_h * h
    double amplitude = 0.3;
    double stream_amplitude = 0.5;
    double gravity = 1.0;
    double kappa_ns = 1.0;
    double min_order = 0.8;
};

struct MmsLevel {
    double h = 0;
    double dt = 0;
    long steps = 0;
    double err_n = 0; ///< max over active cells
    double err_c = 0;
    double err_u = 0; ///< max over fluid faces
};

struct MmsResult {
    std::vector<MmsLevel> levels;
    /// Observed orders between consecutive levels, one row per pair: n, c, u.
    std::vector<std::array<double, 3>> orders;
    bool passed = false;
};

/// Exact fields and forcing for a given case.
class ManufacturedSolution {
public:
    ManufacturedSolution(const MmsOptions& opt);

    double n(Vec2 p, double t) const;
    double c(Vec2 p, double t) const;
    Vec2 u(Vec2 p, double t) const;
    double p(Vec2 p, double t) const;
    double stream(Vec2 p, double t) const;

    KineticsModel model() const;
    bool fluid() const { return kind_ == MmsCase::coupled; }
    Sources sources() const;

private:
    MmsCase kind_;
    double amp_;
    double stream_amp_;
    double gravity_;
    double kappa_;
};

/// Runs every resolution. Throws ConfigError for fewer than two resolutions.
/// A variable whose error is below 1e-12 at both levels counts as converged.
MmsResult run_mms(const MmsOptions& opt);

} // namespace chemofluid
