#include "chemofluid/initial.hpp"

#include <cmath>

namespace chemofluid {

double BumpProfile::operator()(Vec2 p) const {
    const Vec2 d = p - center;
    return base + amplitude * std::exp(-d.dot(d) / (2 * width * width));
}

double VortexProfile::stream(Vec2 p) const {
    const Vec2 d = p - center;
    const double s = 1.0 - d.dot(d) / (radius * radius);
    return s > 0 ? strength * s * s * s : 0.0;
}

VectorField velocity_from_stream(const Mesh& mesh, const std::function<double(Vec2)>& psi) {
    const GridShape& g = mesh.shape();
    std::vector<double> node(g.nodes(), 0.0);
    std::vector<char> wall(g.nodes(), 0);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (mesh.interior(g.cell(i, j))) continue;
            wall[g.node(i, j)] = wall[g.node(i + 1, j)] = wall[g.node(i, j + 1)] = wall[g.node(i + 1, j + 1)] = 1;
        }
    }
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            if (!wall[g.node(i, j)]) node[g.node(i, j)] = psi(g.node_pos(i, j));
        }
    }
    VectorField u(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            u.u()[g.xface(i, j)] = (node[g.node(i, j + 1)] - node[g.node(i, j)]) / g.h;
        }
    }
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            u.v()[g.yface(i, j)] = -(node[g.node(i + 1, j)] - node[g.node(i, j)]) / g.h;
        }
    }
    return u;
}

SimState build_initial_state(const Mesh& mesh, const InitialData& init) {
    const GridShape& g = mesh.shape();
    SimState s = make_state(mesh);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.cell(i, j);
            if (!mesh.active(k)) continue;
            const Vec2 p = g.cell_center(i, j);
            s.n[k] = init.n(p);
            s.c[k] = init.c(p);
        }
    }
    s.n = mesh.make_cv_consistent(s.n);
    s.c = mesh.make_cv_consistent(s.c);
    if (init.velocity == VelocityProfile::vortex) {
        const VortexProfile v = init.vortex;
        s.u = velocity_from_stream(mesh, [v](Vec2 p) { return v.stream(p); });
    }
    return s;
}

} // namespace chemofluid
