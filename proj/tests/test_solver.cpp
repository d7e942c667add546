#include "chemofluid/diagnostics.hpp"
#include "chemofluid/initial.hpp"
#include "chemofluid/solver.hpp"

#include <doctest.h>

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

using namespace chemofluid;

namespace {

MeshPtr disk_mesh(int n) { return std::make_shared<const Mesh>(classify_cells(LevelSetDomain::disk(1.0), 1.0 / n)); }

SimState uniform_state(const Mesh& m, double n0, double c0) {
    SimState s = make_state(m);
    for (std::size_t k = 0; k < s.n.size(); ++k)
        if (m.active(k)) {
            s.n[k] = n0;
            s.c[k] = c0;
        }
    return s;
}

double active_max(const Mesh& m, const ScalarField& f) {
    double v = -1e300;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (m.active(k)) v = std::max(v, f[k]);
    return v;
}

double max_abs(const std::vector<double>& v) {
    double a = 0;
    for (double x : v) a = std::max(a, std::abs(x));
    return a;
}

SimState bump_state(const Mesh& m, bool vortex) {
    InitialData init;
    init.n = {1.0, 0.5, {0.1, 0.1}, 0.2};
    init.c = {0.5, 0.3, {-0.1, 0.0}, 0.2};
    init.velocity = vortex ? VelocityProfile::vortex : VelocityProfile::zero;
    init.vortex = {0.5, {0, 0}, 0.6};
    return build_initial_state(m, init);
}

SparseMatrix laplacian_1d(int n, double shift) {
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
        double diag = shift;
        if (i > 0) {
            t.emplace_back(i, i - 1, -1.0);
            diag += 1;
        }
        if (i + 1 < n) {
            t.emplace_back(i, i + 1, -1.0);
            diag += 1;
        }
        t.emplace_back(i, i, diag);
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

} // namespace

TEST_CASE("cfl_dt") {
    const MeshPtr mesh = disk_mesh(64);
    SolverConfig cfg;
    cfg.dt_max = 1.0;
    Solver solver(mesh, KineticsModel::linear(), cfg, 1e-10);

    SimState s = uniform_state(*mesh, 1.0, 0.5);
    CHECK(solver.cfl_dt(s) == 1.0);

    const GridShape& g = mesh->shape();
    const std::size_t f = g.xface(g.nx / 2, g.ny / 2);
    REQUIRE(mesh->fluid_xface(f));
    s.u.u()[f] = 2.0;
    CHECK(solver.cfl_dt(s) == doctest::Approx(1.0 / 256).epsilon(1e-12));

    // The chemotactic drift dominates for steep c; dt scales like 1 / slope.
    auto ramp = [&](double slope) {
        SimState r = uniform_state(*mesh, 1.0, 0.0);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (mesh->active(g.cell(i, j))) r.c.at(i, j) = slope * (g.cell_center(i, j).x + 2);
        return solver.cfl_dt(r);
    };
    CHECK(ramp(100) / ramp(200) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK_THROWS_AS(ramp(1e16), SolverAbort);
}

TEST_CASE("step_c: pure Neumann heat flow") {
    const MeshPtr mesh = disk_mesh(32);
    SolverConfig cfg;
    cfg.fluid = false;
    Solver solver(mesh, KineticsModel::linear(0.0), cfg, 1e-10);
    SimState s = bump_state(*mesh, false);
    std::fill(s.n.values().begin(), s.n.values().end(), 0.0);
    const double m0 = volume_integral(s.c, mesh->geometry());
    double cmax = active_max(*mesh, s.c);
    for (int k = 0; k < 50; ++k) {
        solver.step_c(s, 0.01);
        const double now = active_max(*mesh, s.c);
        CHECK(now <= cmax + 1e-12 * 0.8);
        cmax = now;
    }
    CHECK(std::abs(volume_integral(s.c, mesh->geometry()) - m0) <= 1e-10 * m0);
}

TEST_CASE("step_c: uniform consumption follows c/(1 + dt n0)") {
    const MeshPtr mesh = disk_mesh(32);
    Solver solver(mesh, KineticsModel::linear(0.0), SolverConfig{}, 1e-10);
    SimState s = uniform_state(*mesh, 2.0, 0.8);
    double expect = 0.8;
    const double dt = 0.01;
    for (int k = 0; k < 20; ++k) {
        solver.step_c(s, dt);
        expect = expect / (1 + dt * 2.0);
    }
    for (std::size_t c = 0; c < s.c.size(); ++c)
        if (mesh->active(c)) CHECK(s.c[c] == doctest::Approx(expect).epsilon(1e-12));

    SimState z = uniform_state(*mesh, 2.0, 0.0);
    solver.step_c(z, dt);
    CHECK(max_abs(z.c.values()) == 0.0);
}

TEST_CASE("step_n: heat flow without drift conserves mass and flattens") {
    const MeshPtr mesh = disk_mesh(32);
    SolverConfig cfg;
    cfg.fluid = false;
    Solver solver(mesh, KineticsModel::linear(0.0), cfg, 1e-10);
    SimState s = bump_state(*mesh, false);
    std::fill(s.c.values().begin(), s.c.values().end(), 0.5);
    const double m0 = volume_integral(s.n, mesh->geometry());
    const double spread0 = active_max(*mesh, s.n);
    for (int k = 0; k < 200; ++k) solver.step_n(s, 0.01);
    CHECK(std::abs(volume_integral(s.n, mesh->geometry()) - m0) <= 1e-12 * m0);
    const double mean = m0 / mesh->geometry().area();
    CHECK(active_max(*mesh, s.n) - mean < 1e-3 * (spread0 - mean));
}

TEST_CASE("step: mass over 1000 coupled steps") {
    const MeshPtr mesh = disk_mesh(32);
    SolverConfig cfg;
    cfg.dt_max = 0.005;
    cfg.end_time = 100;
    Solver solver(mesh, KineticsModel::linear(1.0, 1.0), cfg, 1e-10);
    SimState s = bump_state(*mesh, true);
    const double m0 = volume_integral(s.n, mesh->geometry());
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
        solver.step(s);
        worst = std::max(worst, std::abs(volume_integral(s.n, mesh->geometry()) - m0) / m0);
        double nmin = 1e300, nmax = 0;
        for (std::size_t c = 0; c < s.n.size(); ++c)
            if (mesh->active(c)) {
                nmin = std::min(nmin, s.n[c]);
                nmax = std::max(nmax, s.n[c]);
            }
        REQUIRE(nmin >= -1e-10 * nmax);
    }
    CHECK(worst <= 1e-8);
    CHECK(s.step == 1000);
}

TEST_CASE("step_u: no forcing, fluid at rest") {
    const MeshPtr mesh = disk_mesh(32);
    Solver solver(mesh, KineticsModel::linear(0.0, 1.0), SolverConfig{}, 1e-10);
    SimState s = uniform_state(*mesh, 1.0, 0.5);
    for (int k = 0; k < 5; ++k) solver.step_u(s, 0.01);
    CHECK(max_abs(s.u.u()) == 0.0);
    CHECK(max_abs(s.u.v()) == 0.0);
    CHECK(max_abs(s.p.values()) <= 1e-14);
}

TEST_CASE("step_u: uniform buoyancy is balanced by a hydrostatic pressure") {
    const MeshPtr mesh = disk_mesh(32);
    const double n0 = 1.5, grav = 2.0;
    Solver solver(mesh, KineticsModel::linear(grav, 0.0), SolverConfig{}, 1e-10);
    SimState s = uniform_state(*mesh, n0, 0.5);
    StepInfo info;
    // The projection boundary layer relaxes like e^{-2t}; t = 10 leaves ~1e-9.
    for (int k = 0; k < 1000; ++k) solver.step_u(s, 0.01, &info);
    CHECK(max_abs(s.u.u()) < 1e-8);
    CHECK(max_abs(s.u.v()) < 1e-8);
    // p = n0 phi + const with phi = -G y.
    const GridShape& g = mesh->shape();
    double off = 0;
    int count = 0;
    for (std::size_t c : mesh->pressure_cells()) {
        off += s.p[c] + n0 * grav * g.cell_center(static_cast<int>(c % g.nx), static_cast<int>(c / g.nx)).y;
        ++count;
    }
    off /= count;
    for (std::size_t c : mesh->pressure_cells()) {
        const double y = g.cell_center(static_cast<int>(c % g.nx), static_cast<int>(c / g.nx)).y;
        CHECK(std::abs(s.p[c] - (-n0 * grav * y + off)) < 1e-7);
    }
    CHECK(std::abs(info.p_mean) <= 1e-12 * info.p_max);
}

TEST_CASE("step_u: unforced kinetic energy decreases") {
    const MeshPtr mesh = disk_mesh(32);
    Solver solver(mesh, KineticsModel::linear(0.0, 1.0), SolverConfig{}, 1e-10);
    SimState s = bump_state(*mesh, true);
    const Diagnostics d(mesh, build_derived(KineticsModel::linear(), 1e-10, 1.0), 1.0);
    double e = d.u_l2(s.u);
    REQUIRE(e > 0);
    for (int k = 0; k < 30; ++k) {
        solver.step_u(s, 0.005);
        const double now = d.u_l2(s.u);
        CHECK(now <= e);
        e = now;
    }
}

TEST_CASE("step: the homogeneous state is a fixed point") {
    const MeshPtr mesh = disk_mesh(32);
    SolverConfig cfg;
    cfg.end_time = 10;
    Solver solver(mesh, KineticsModel::linear(0.0, 1.0), cfg, 1e-10);
    SimState s = uniform_state(*mesh, 1.2, 0.0);
    for (int k = 0; k < 10; ++k) solver.step(s);
    for (std::size_t c = 0; c < s.n.size(); ++c) {
        if (!mesh->active(c)) continue;
        CHECK(s.n[c] == doctest::Approx(1.2).epsilon(1e-12));
        CHECK(s.c[c] == 0.0);
    }
    CHECK(max_abs(s.u.u()) == 0.0);
    CHECK(max_abs(s.u.v()) == 0.0);
}

TEST_CASE("step: Stokes and Navier-Stokes differ only through advection") {
    const MeshPtr mesh = disk_mesh(32);
    auto run = [&](double kappa, bool vortex) {
        SolverConfig cfg;
        cfg.end_time = 10;
        Solver solver(mesh, KineticsModel::linear(0.0, kappa), cfg, 1e-10);
        SimState s = bump_state(*mesh, vortex);
        for (int k = 0; k < 10; ++k) solver.step(s);
        return s;
    };
    // Without velocity the advection term is zero and both paths agree bitwise.
    const SimState a = run(0.0, false), b = run(1.0, false);
    CHECK(a.n.values() == b.n.values());
    CHECK(a.c.values() == b.c.values());
    const SimState c = run(0.0, true), d = run(1.0, true);
    CHECK(c.u.u() != d.u.u());
}

TEST_CASE("step: deterministic") {
    const MeshPtr mesh = disk_mesh(32);
    auto run = [&] {
        Solver solver(mesh, KineticsModel::linear(1.0, 1.0), SolverConfig{}, 1e-10);
        SimState s = bump_state(*mesh, true);
        for (int k = 0; k < 20; ++k) solver.step(s);
        return s;
    };
    const SimState a = run(), b = run();
    CHECK(a.n.values() == b.n.values());
    CHECK(a.u.v() == b.u.v());
    CHECK(a.p.values() == b.p.values());
}

TEST_CASE("solve_spd") {
    const SparseMatrix a = laplacian_1d(50, 0.1);
    std::vector<double> b(50, 0.0), x(50, 0.0);
    for (Preconditioner p : {Preconditioner::none, Preconditioner::jacobi, Preconditioner::incomplete_cholesky,
                             Preconditioner::cholesky}) {
        solve_spd(a, b, x, 1e-10, 100, p);
        CHECK(max_abs(x) == 0.0);
    }

    // Singular Neumann operator: the zero right-hand side gives the mean-zero 0.
    const SparseMatrix lap = laplacian_1d(50, 0.0);
    std::vector<double> y(50, 3.0);
    solve_spd(lap, b, y, 1e-12, 200, Preconditioner::jacobi, std::vector<int>(50, 0));
    CHECK(max_abs(y) < 1e-12);
    std::vector<double> bad(50, 1.0);
    CHECK_THROWS_AS(solve_spd(lap, bad, y, 1e-12, 200, Preconditioner::jacobi, std::vector<int>(50, 0)), SolverAbort);

    // Helmholtz with a random right-hand side.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::VectorXd rhs(50);
    for (int i = 0; i < 50; ++i) rhs[i] = u(rng);
    for (Preconditioner p : {Preconditioner::jacobi, Preconditioner::cholesky}) {
        Eigen::VectorXd sol = Eigen::VectorXd::Zero(50);
        const SolveStats st = solve_spd(a, std::span<const double>(rhs.data(), 50), std::span<double>(sol.data(), 50),
                                        1e-8, 500, p);
        CHECK((a * sol - rhs).norm() <= 1e-8 * rhs.norm());
        CHECK(st.relative_residual <= 1e-8);
    }
    Eigen::VectorXd sol = Eigen::VectorXd::Zero(50);
    CHECK_THROWS_AS(solve_spd(a, std::span<const double>(rhs.data(), 50), std::span<double>(sol.data(), 50), 1e-14, 2,
                              Preconditioner::none),
                    SolverAbort);
}

TEST_CASE("initial data validation") {
    const MeshPtr mesh = disk_mesh(32);
    SimState s = bump_state(*mesh, true);
    CHECK_NOTHROW(validate_initial_state(*mesh, s));
    SimState neg = s;
    neg.n[mesh->shape().cell(mesh->shape().nx / 2, mesh->shape().ny / 2)] = -1.0;
    CHECK_THROWS_AS(validate_initial_state(*mesh, neg), ValidationError);
    SimState slip = s;
    for (std::size_t f = 0; f < slip.u.u().size(); ++f)
        if (!mesh->fluid_xface(f)) {
            slip.u.u()[f] = 1.0;
            break;
        }
    CHECK_THROWS_AS(validate_initial_state(*mesh, slip), ValidationError);
}

TEST_CASE("checkpoint round trip") {
    const MeshPtr mesh = disk_mesh(32);
    Solver solver(mesh, KineticsModel::linear(1.0, 1.0), SolverConfig{}, 1e-10);
    SimState s = bump_state(*mesh, true);
    for (int k = 0; k < 3; ++k) solver.step(s);
    const auto path = std::filesystem::temp_directory_path() / "chemofluid_checkpoint_test.grid";
    write_checkpoint(path.string(), s);
    const SimState r = read_checkpoint(path.string(), mesh->shape());
    std::filesystem::remove(path);
    CHECK(r.n.values() == s.n.values());
    CHECK(r.c.values() == s.c.values());
    CHECK(r.p.values() == s.p.values());
    CHECK(r.u.u() == s.u.u());
    CHECK(r.u.v() == s.u.v());
    CHECK(r.t == s.t);
}

TEST_CASE("solver configuration validation") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    c.cfl_safety = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SolverConfig{};
    c.dt_max = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
