// Builtin initial profiles.

#pragma once

#include "chemofluid/solver.hpp"

#include <string>

namespace chemofluid {

/// n0 = base + amplitude exp(-|x - center|^2 / (2 width^2))
struct BumpProfile {
    double base = 1.0;
    double amplitude = 0.0;
    Vec2 center{};
    double width = 0.25;

    double operator()(Vec2 p) const;
};

enum class VelocityProfile { zero, vortex };

/// Stream function strength * (1 - r^2/radius^2)^3 inside the given radius.
struct VortexProfile {
    double strength = 0.0;
    Vec2 center{};
    double radius = 0.5;

    double stream(Vec2 p) const;
};

struct InitialData {
    BumpProfile n;
    BumpProfile c;
    VelocityProfile velocity = VelocityProfile::zero;
    VortexProfile vortex;
};

/// MAC velocity from node values of a stream function: u = dPsi/dy,
/// v = -dPsi/dx. Nodes of non-interior cells are set to zero first, so the
/// result is exactly divergence-free and vanishes on every no-slip face.
VectorField velocity_from_stream(const Mesh& mesh, const std::function<double(Vec2)>& psi);

/// Cell samples of the profiles, averaged per control volume.
SimState build_initial_state(const Mesh& mesh, const InitialData& init);

} // namespace chemofluid
