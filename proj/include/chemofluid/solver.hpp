// First-order IMEX time stepping of the coupled cell / oxygen / fluid
// system on a masked grid.
//
//     n_t + u.grad n = lap n - div(n chi(c) grad c)
//     c_t + u.grad c = lap c - n f(c)
//     u_t + grad p   = lap u + kappa (u.grad) u + n grad phi,   div u = 0
//
// Pressure is stored with the sign shown here, so a fluid at rest under a
// uniform density n0 carries p = n0 phi up to a constant.
//
// One step: choose dt, then update c, then n (with the new c), then u and p.

#pragma once

#include "chemofluid/fields.hpp"
#include "chemofluid/linear_solver.hpp"
#include "chemofluid/model.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>

namespace chemofluid {

struct SimState {
    ScalarField n;
    ScalarField c;
    VectorField u;
    ScalarField p;
    double t = 0;
    long step = 0;
};

struct SolverConfig {
    double dt_max = 1e-2;
    double cfl_safety = 0.5;
    double end_time = 1.0;
    double linear_tol = 1e-8;  ///< velocity and pressure solves
    double scalar_tol = 1e-13; ///< n and c solves
    int max_cg_iterations = 20000;
    Preconditioner preconditioner = Preconditioner::cholesky;
    /// When false the fluid is frozen at u = 0 and no projection is done.
    bool fluid = true;
    /// Round the CFL step down to dt_max 2^{-k/4}.
    bool dt_ladder = true;

    /// Throws ConfigError on non-positive values or cfl_safety > 1.
    void validate() const;
};

/// Manufactured forcing added to each equation; any member may be empty.
struct Sources {
    std::function<double(Vec2, double)> n;
    std::function<double(Vec2, double)> c;
    std::function<Vec2(Vec2, double)> u;
};

struct StepInfo {
    double dt = 0;
    int n_substeps = 1;
    int iterations = 0; ///< total CG iterations of the step
    double div_max = 0;   ///< max |div u| after the projection
    double p_mean = 0;    ///< mean pressure after the gauge
    double p_max = 0;     ///< max |p| after the gauge
    double pressure_tol = 0; ///< relative tolerance used for the projection
};

/// Checks n > 0 and c >= 0 on active cells, u = 0 on no-slip faces and
/// max |div u| <= div_tol. Throws ValidationError.
void validate_initial_state(const Mesh& mesh, const SimState& s, double div_tol = 1e-10);

/// Zero state with fields sized for the mesh.
SimState make_state(const Mesh& mesh);

/// Mean of a pressure-like field over the domain after extending interior
/// values to boundary-band cells.
double pressure_mean(const Mesh& mesh, const ScalarField& p);

/// Copy interior values outwards into the boundary band by repeated neighbour
/// averaging.
void extend_to_band(const Mesh& mesh, ScalarField& p);

class Solver {
public:
    Solver(MeshPtr mesh, KineticsModel model, SolverConfig config, double c_floor);

    const Mesh& mesh() const { return *mesh_; }
    const SolverConfig& config() const { return config_; }
    const KineticsModel& model() const { return model_; }
    void set_sources(Sources s) { sources_ = std::move(s); }

    /// Largest stable step: cfl_safety times the smaller of h / max face speed
    /// and the per-CV positivity bound V / (face flux), capped by dt_max.
    /// Throws SolverAbort when the result falls below 1e-12.
    double cfl_dt(const SimState& s) const;

    void step_c(SimState& s, double dt);
    void step_n(SimState& s, double dt, StepInfo* info = nullptr);
    void step_u(SimState& s, double dt, StepInfo* info = nullptr);

    /// One step with dt = min(cfl_dt, end_time - t); with dt_ladder the CFL
    /// value is first rounded down onto the ladder.
    StepInfo step(SimState& s);
    /// One step with the given dt (no CFL selection; n is sub-cycled if needed).
    StepInfo step_fixed(SimState& s, double dt);

    /// Face velocity driving n: chi(c_f) (c_b - c_a)/h + u on links.
    VectorField drift_velocity(const SimState& s) const;

    /// Wall-clock seconds spent per kernel.
    const std::map<std::string, double>& timings() const { return timings_; }

private:
    /// dt-dependent operator; the preconditioner is rebuilt only when dt
    /// leaves [factor_dt / 1.5, 1.5 factor_dt].
    struct TimedSystem {
        double dt = -1;
        double factor_dt = -1;
        int repeats = 0; ///< consecutive uses of dt != factor_dt
        std::unique_ptr<SpdSolver> solver;
    };

    const SpdSolver& cached_system(TimedSystem& sys, double dt, const std::function<SparseMatrix(double)>& build);
    SparseMatrix scalar_matrix(double dt) const;
    SparseMatrix velocity_matrix(bool x_axis, double dt) const;
    const SpdSolver& scalar_system(double dt);
    const SpdSolver& velocity_system(bool x_axis, double dt);
    std::vector<double> cv_source(const std::function<double(Vec2, double)>& f, double t) const;
    void diffuse(std::vector<double>& cv_rhs, std::vector<double>& cv_x, double dt, int& iterations);
    VectorField advection_term(const VectorField& u) const;

    MeshPtr mesh_;
    KineticsModel model_;
    SolverConfig config_;
    double c_floor_;
    Sources sources_;

    std::vector<std::size_t> fluid_x_;
    std::vector<std::size_t> fluid_y_;
    std::vector<int> fluid_x_index_;
    std::vector<int> fluid_y_index_;

    TimedSystem scalar_;
    TimedSystem vel_x_;
    TimedSystem vel_y_;
    std::unique_ptr<SpdSolver> pressure_;

    std::map<std::string, double> timings_;
};

/// Checkpoint: fields n, c, p (cell), u (xface), v (yface) and the time.
void write_checkpoint(const std::string& path, const SimState& s);
SimState read_checkpoint(const std::string& path, const GridShape& shape);

} // namespace chemofluid
