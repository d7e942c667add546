#include "chemofluid/solver.hpp"

#include "chemofluid/errors.hpp"
#include "chemofluid/grid_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace chemofluid {

namespace {

class ScopedTimer {
public:
    ScopedTimer(std::map<std::string, double>& sink, const char* key)
        : sink_(sink), key_(key), start_(std::chrono::steady_clock::now()) {}
    ~ScopedTimer() {
        sink_[key_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::map<std::string, double>& sink_;
    const char* key_;
    std::chrono::steady_clock::time_point start_;
};

double face_value(const VectorField& w, const Link& l) { return l.x_axis ? w.u()[l.face] : w.v()[l.face]; }

} // namespace

void SolverConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0) || !std::isfinite(v)) throw ConfigError(std::string("solver.") + name + " must be positive");
    };
    positive(dt_max, "dt_max");
    positive(cfl_safety, "cfl_safety");
    positive(end_time, "end_time");
    positive(linear_tol, "linear_tol");
    positive(scalar_tol, "scalar_tol");
    if (cfl_safety > 1) throw ConfigError("solver.cfl_safety must not exceed 1");
    if (max_cg_iterations <= 0) throw ConfigError("solver.max_cg_iterations must be positive");
}

SimState make_state(const Mesh& mesh) {
    SimState s;
    s.n = ScalarField(mesh.shape());
    s.c = ScalarField(mesh.shape());
    s.u = VectorField(mesh.shape());
    s.p = ScalarField(mesh.shape());
    return s;
}

void validate_initial_state(const Mesh& mesh, const SimState& s, double div_tol) {
    const GridShape& g = mesh.shape();
    require_same_grid(s.n.shape(), g, "initial n");
    require_same_grid(s.c.shape(), g, "initial c");
    require_same_grid(s.u.shape(), g, "initial u");
    for (std::size_t k = 0; k < g.cells(); ++k) {
        if (!mesh.active(k)) continue;
        if (!(s.n[k] > 0) || !std::isfinite(s.n[k])) throw ValidationError("initial n must be positive in the domain");
        if (!(s.c[k] >= 0) || !std::isfinite(s.c[k])) throw ValidationError("initial c must be nonnegative in the domain");
    }
    for (std::size_t f = 0; f < g.xfaces(); ++f) {
        if (!mesh.fluid_xface(f) && s.u.u()[f] != 0) throw ValidationError("initial u must vanish on no-slip faces");
    }
    for (std::size_t f = 0; f < g.yfaces(); ++f) {
        if (!mesh.fluid_yface(f) && s.u.v()[f] != 0) throw ValidationError("initial u must vanish on no-slip faces");
    }
    const ScalarField div = divergence(mesh, s.u);
    for (std::size_t k = 0; k < div.size(); ++k) {
        if (std::abs(div[k]) > div_tol) throw ValidationError("initial u is not divergence-free");
    }
}

void extend_to_band(const Mesh& mesh, ScalarField& p) {
    const GridShape& g = mesh.shape();
    std::vector<char> known(g.cells(), 0);
    std::size_t missing = 0;
    for (std::size_t k = 0; k < g.cells(); ++k) {
        known[k] = mesh.interior(k);
        if (!mesh.active(k)) p[k] = 0;
        if (mesh.active(k) && !known[k]) ++missing;
    }
    while (missing > 0) {
        std::vector<std::pair<std::size_t, double>> fill;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t k = g.cell(i, j);
                if (known[k] || !mesh.active(k)) continue;
                double sum = 0;
                int cnt = 0;
                auto take = [&](int a, int b) {
                    if (a < 0 || b < 0 || a >= g.nx || b >= g.ny) return;
                    const std::size_t q = g.cell(a, b);
                    if (known[q]) {
                        sum += p[q];
                        ++cnt;
                    }
                };
                take(i + 1, j);
                take(i - 1, j);
                take(i, j + 1);
                take(i, j - 1);
                if (cnt > 0) fill.emplace_back(k, sum / cnt);
            }
        }
        if (fill.empty()) {
            // Active cells with no path to an interior cell: set to zero.
            for (std::size_t k = 0; k < g.cells(); ++k) {
                if (mesh.active(k) && !known[k]) p[k] = 0;
            }
            break;
        }
        for (auto [k, v] : fill) {
            p[k] = v;
            known[k] = 1;
            --missing;
        }
    }
}

double pressure_mean(const Mesh& mesh, const ScalarField& p) {
    return volume_integral(p, mesh.geometry()) / mesh.geometry().area();
}

Solver::Solver(MeshPtr mesh, KineticsModel model, SolverConfig config, double c_floor)
    : mesh_(std::move(mesh)), model_(std::move(model)), config_(config), c_floor_(c_floor) {
    config_.validate();
    const GridShape& g = mesh_->shape();
    fluid_x_index_.assign(g.xfaces(), -1);
    fluid_y_index_.assign(g.yfaces(), -1);
    for (std::size_t f = 0; f < g.xfaces(); ++f) {
        if (mesh_->fluid_xface(f)) {
            fluid_x_index_[f] = static_cast<int>(fluid_x_.size());
            fluid_x_.push_back(f);
        }
    }
    for (std::size_t f = 0; f < g.yfaces(); ++f) {
        if (mesh_->fluid_yface(f)) {
            fluid_y_index_[f] = static_cast<int>(fluid_y_.size());
            fluid_y_.push_back(f);
        }
    }

    if (config_.fluid && mesh_->num_pressure() > 0) {
        const auto np = static_cast<Eigen::Index>(mesh_->num_pressure());
        std::vector<Eigen::Triplet<double>> trip;
        auto couple = [&](std::size_t a, std::size_t b) {
            const int pa = mesh_->pressure_index(a);
            const int pb = mesh_->pressure_index(b);
            trip.emplace_back(pa, pa, 1.0);
            trip.emplace_back(pb, pb, 1.0);
            trip.emplace_back(pa, pb, -1.0);
            trip.emplace_back(pb, pa, -1.0);
        };
        for (std::size_t f : fluid_x_) {
            const int i = static_cast<int>(f % (g.nx + 1));
            const int j = static_cast<int>(f / (g.nx + 1));
            couple(g.cell(i - 1, j), g.cell(i, j));
        }
        for (std::size_t f : fluid_y_) {
            const int i = static_cast<int>(f % g.nx);
            const int j = static_cast<int>(f / g.nx);
            couple(g.cell(i, j - 1), g.cell(i, j));
        }
        SparseMatrix a(np, np);
        a.setFromTriplets(trip.begin(), trip.end());
        const auto comps = mesh_->pressure_components();
        pressure_ = std::make_unique<SpdSolver>(std::move(a), config_.preconditioner,
                                                std::vector<int>(comps.begin(), comps.end()));
    }
}

const SpdSolver& Solver::cached_system(TimedSystem& sys, double dt,
                                      const std::function<SparseMatrix(double)>& build) {
    if (sys.solver && sys.dt == dt) {
        // Refactor once an approximate operator keeps being reused.
        if (dt == sys.factor_dt || ++sys.repeats < 2) return *sys.solver;
    } else {
        sys.repeats = 0;
    }
    if (sys.solver && sys.repeats == 0 && dt <= 1.5 * sys.factor_dt && dt >= sys.factor_dt / 1.5) {
        sys.solver->set_matrix(build(dt));
    } else {
        sys.solver = std::make_unique<SpdSolver>(build(dt), config_.preconditioner);
        sys.factor_dt = dt;
        sys.repeats = 0;
    }
    sys.dt = dt;
    return *sys.solver;
}

const SpdSolver& Solver::scalar_system(double dt) {
    return cached_system(scalar_, dt, [this](double d) { return scalar_matrix(d); });
}

const SpdSolver& Solver::velocity_system(bool x_axis, double dt) {
    return cached_system(x_axis ? vel_x_ : vel_y_, dt, [this, x_axis](double d) { return velocity_matrix(x_axis, d); });
}

SparseMatrix Solver::scalar_matrix(double dt) const {
    const auto ncv = static_cast<Eigen::Index>(mesh_->num_cv());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh_->num_cv() + 4 * mesh_->links().size());
    for (Eigen::Index k = 0; k < ncv; ++k) trip.emplace_back(k, k, mesh_->cv_volume(static_cast<int>(k)) / dt);
    for (const Link& l : mesh_->links()) {
        trip.emplace_back(l.cv_a, l.cv_a, l.aperture);
        trip.emplace_back(l.cv_b, l.cv_b, l.aperture);
        trip.emplace_back(l.cv_a, l.cv_b, -l.aperture);
        trip.emplace_back(l.cv_b, l.cv_a, -l.aperture);
    }
    SparseMatrix a(ncv, ncv);
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

SparseMatrix Solver::velocity_matrix(bool x_axis, double dt) const {
    const GridShape& g = mesh_->shape();
    const auto& faces = x_axis ? fluid_x_ : fluid_y_;
    const auto& index = x_axis ? fluid_x_index_ : fluid_y_index_;
    const double diag = g.h * g.h / dt + 4.0;
    const int stride_i = 1;
    const int row_len = x_axis ? g.nx + 1 : g.nx;
    const int rows = x_axis ? g.ny : g.ny + 1;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * faces.size());
    for (std::size_t k = 0; k < faces.size(); ++k) {
        const std::size_t f = faces[k];
        const int i = static_cast<int>(f % row_len);
        const int j = static_cast<int>(f / row_len);
        trip.emplace_back(k, k, diag);
        auto nb = [&](int a, int b) {
            if (a < 0 || b < 0 || a >= row_len || b >= rows) return;
            const int q = index[static_cast<std::size_t>(b) * row_len + a];
            if (q >= 0) trip.emplace_back(k, q, -1.0);
        };
        nb(i + stride_i, j);
        nb(i - stride_i, j);
        nb(i, j + 1);
        nb(i, j - 1);
    }
    const auto m = static_cast<Eigen::Index>(faces.size());
    SparseMatrix a(m, m);
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

std::vector<double> Solver::cv_source(const std::function<double(Vec2, double)>& f, double t) const {
    const GridShape& g = mesh_->shape();
    const auto& frac = mesh_->geometry().volume_fraction;
    std::vector<double> out(mesh_->num_cv(), 0.0);
    for (std::size_t cv = 0; cv < out.size(); ++cv) {
        double num = 0;
        double den = 0;
        for (std::size_t c : mesh_->cv_cells(static_cast<int>(cv))) {
            const int i = static_cast<int>(c % g.nx);
            const int j = static_cast<int>(c / g.nx);
            num += frac[c] * f(g.cell_center(i, j), t);
            den += frac[c];
        }
        out[cv] = num / den;
    }
    return out;
}

void Solver::diffuse(std::vector<double>& cv_rhs, std::vector<double>& cv_x, double dt, int& iterations) {
    const SpdSolver& sys = scalar_system(dt);
    for (std::size_t k = 0; k < cv_rhs.size(); ++k) cv_rhs[k] *= mesh_->cv_volume(static_cast<int>(k)) / dt;
    const SolveStats st = sys.solve(cv_rhs, cv_x, config_.scalar_tol, config_.max_cg_iterations);
    iterations += st.iterations;
}

VectorField Solver::drift_velocity(const SimState& s) const {
    const double h = mesh_->h();
    VectorField w(mesh_->shape());
    for (const Link& l : mesh_->links()) {
        const double cf = 0.5 * (s.c[l.cell_a] + s.c[l.cell_b]);
        const double chem = model_.chi(cf) * (s.c[l.cell_b] - s.c[l.cell_a]) / h;
        if (l.x_axis) {
            w.u()[l.face] = chem + s.u.u()[l.face];
        } else {
            w.v()[l.face] = chem + s.u.v()[l.face];
        }
    }
    return w;
}

double Solver::cfl_dt(const SimState& s) const {
    const double h = mesh_->h();
    const VectorField w = drift_velocity(s);
    double speed = 0;
    std::vector<double> out(mesh_->num_cv(), 0.0);
    std::vector<double> in(mesh_->num_cv(), 0.0);
    for (const Link& l : mesh_->links()) {
        const double wf = face_value(w, l);
        const double uf = face_value(s.u, l);
        speed = std::max(speed, std::abs(wf));
        const double flux = l.aperture * h * wf;
        if (flux > 0) out[l.cv_a] += flux;
        if (flux < 0) out[l.cv_b] -= flux;
        const double uflux = l.aperture * h * uf;
        if (uflux > 0) in[l.cv_b] += uflux;
        if (uflux < 0) in[l.cv_a] -= uflux;
    }
    if (model_.kappa_ns != 0) {
        for (double x : s.u.u()) speed = std::max(speed, std::abs(model_.kappa_ns * x));
        for (double x : s.u.v()) speed = std::max(speed, std::abs(model_.kappa_ns * x));
    }
    double bound = std::numeric_limits<double>::infinity();
    if (speed > 0) bound = h / speed;
    for (std::size_t cv = 0; cv < out.size(); ++cv) {
        const double f = std::max(out[cv], in[cv]);
        if (f > 0) bound = std::min(bound, mesh_->cv_volume(static_cast<int>(cv)) / f);
    }
    const double dt = std::min(config_.dt_max, config_.cfl_safety * bound);
    if (!(dt >= 1e-12)) {
        std::ostringstream m;
        m << "time step underflow (dt = " << dt << ", max face speed " << speed << "); suspected blow-up";
        throw SolverAbort(m.str());
    }
    return dt;
}

void Solver::step_c(SimState& s, double dt) {
    ScopedTimer timer(timings_, "step_c");
    int its = 0;
    const ScalarField adv = advect_advective(*mesh_, s.c, s.u);
    std::vector<double> c_cv = mesh_->restrict_cv(s.c);
    const std::vector<double> adv_cv = mesh_->restrict_cv(adv);
    std::vector<double> rhs(c_cv.size());
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = c_cv[k] + dt * adv_cv[k];
    if (sources_.c) {
        const auto src = cv_source(sources_.c, s.t + dt);
        for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] += dt * src[k];
    }
    diffuse(rhs, c_cv, dt, its);
    const std::vector<double> n_cv = mesh_->restrict_cv(s.n);
    for (std::size_t k = 0; k < c_cv.size(); ++k) {
        const double cs = c_cv[k];
        c_cv[k] = cs / (1.0 + dt * n_cv[k] * model_.f(cs) / std::max(cs, c_floor_));
    }
    s.c = mesh_->prolong_cv(c_cv);
}

void Solver::step_n(SimState& s, double dt, StepInfo* info) {
    ScopedTimer timer(timings_, "step_n");
    const double h = mesh_->h();
    const VectorField w = drift_velocity(s);
    std::vector<double> out(mesh_->num_cv(), 0.0);
    for (const Link& l : mesh_->links()) {
        const double flux = l.aperture * h * face_value(w, l);
        if (flux > 0) out[l.cv_a] += flux;
        if (flux < 0) out[l.cv_b] -= flux;
    }
    double ratio = 0;
    for (std::size_t cv = 0; cv < out.size(); ++cv) {
        ratio = std::max(ratio, dt * out[cv] / mesh_->cv_volume(static_cast<int>(cv)));
    }
    const int sub = std::max(1, static_cast<int>(std::ceil(ratio - 1e-12)));
    const double dts = dt / sub;
    ScalarField n = s.n;
    for (int k = 0; k < sub; ++k) {
        const ScalarField tend = advect_conservative(*mesh_, n, w);
        for (std::size_t q = 0; q < n.size(); ++q) n[q] += dts * tend[q];
    }
    std::vector<double> rhs = mesh_->restrict_cv(n);
    if (sources_.n) {
        const auto src = cv_source(sources_.n, s.t + dt);
        for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] += dt * src[k];
    }
    std::vector<double> x = mesh_->restrict_cv(s.n);
    int its = 0;
    diffuse(rhs, x, dt, its);
    s.n = mesh_->prolong_cv(x);

    double nmax = 0;
    double nmin = std::numeric_limits<double>::infinity();
    for (double v : x) {
        nmax = std::max(nmax, v);
        nmin = std::min(nmin, v);
    }
    if (!sources_.n && nmin < -1e-10 * nmax) {
        std::ostringstream m;
        m << "n became negative (min " << nmin << ", max " << nmax << ")";
        throw SolverAbort(m.str());
    }
    if (info) {
        info->n_substeps = sub;
        info->iterations += its;
    }
}

VectorField Solver::advection_term(const VectorField& u) const {
    const GridShape& g = mesh_->shape();
    const double h = g.h;
    const double kappa = model_.kappa_ns;
    VectorField out(g);
    auto uval = [&](int i, int j) {
        if (i < 0 || j < 0 || i > g.nx || j >= g.ny) return 0.0;
        return u.u()[g.xface(i, j)];
    };
    auto vval = [&](int i, int j) {
        if (i < 0 || j < 0 || i >= g.nx || j > g.ny) return 0.0;
        return u.v()[g.yface(i, j)];
    };
    // kappa (u.grad) u = -(a.grad) u with a = -kappa u, upwinded along a.
    auto upwind = [&](double ax, double ay, double c, double e, double w, double n, double s) {
        const double dx = ax > 0 ? (c - w) / h : (e - c) / h;
        const double dy = ay > 0 ? (c - s) / h : (n - c) / h;
        return -(ax * dx + ay * dy);
    };
    for (std::size_t f : fluid_x_) {
        const int i = static_cast<int>(f % (g.nx + 1));
        const int j = static_cast<int>(f / (g.nx + 1));
        const double uc = uval(i, j);
        const double vc = 0.25 * (vval(i - 1, j) + vval(i, j) + vval(i - 1, j + 1) + vval(i, j + 1));
        out.u()[f] = upwind(-kappa * uc, -kappa * vc, uc, uval(i + 1, j), uval(i - 1, j), uval(i, j + 1), uval(i, j - 1));
    }
    for (std::size_t f : fluid_y_) {
        const int i = static_cast<int>(f % g.nx);
        const int j = static_cast<int>(f / g.nx);
        const double vc = vval(i, j);
        const double uc = 0.25 * (uval(i, j - 1) + uval(i + 1, j - 1) + uval(i, j) + uval(i + 1, j));
        out.v()[f] = upwind(-kappa * uc, -kappa * vc, vc, vval(i + 1, j), vval(i - 1, j), vval(i, j + 1), vval(i, j - 1));
    }
    return out;
}

void Solver::step_u(SimState& s, double dt, StepInfo* info) {
    ScopedTimer timer(timings_, "step_u");
    if (!config_.fluid || !pressure_) return;
    const GridShape& g = mesh_->shape();
    const double h = g.h;
    const VectorField force = buoyancy_force(*mesh_, s.n, model_);
    VectorField adv(g);
    if (model_.kappa_ns != 0) adv = advection_term(s.u);
    int its = 0;

    // Momentum predictor with the old pressure gradient.
    for (int axis = 0; axis < 2; ++axis) {
        const bool xa = axis == 0;
        const auto& faces = xa ? fluid_x_ : fluid_y_;
        if (faces.empty()) continue;
        const int row_len = xa ? g.nx + 1 : g.nx;
        std::vector<double>& uc = xa ? s.u.u() : s.u.v();
        const std::vector<double>& fc = xa ? force.u() : force.v();
        const std::vector<double>& ac = xa ? adv.u() : adv.v();
        std::vector<double> rhs(faces.size());
        std::vector<double> x(faces.size());
        for (std::size_t k = 0; k < faces.size(); ++k) {
            const std::size_t f = faces[k];
            const int i = static_cast<int>(f % row_len);
            const int j = static_cast<int>(f / row_len);
            const std::size_t ca = xa ? g.cell(i - 1, j) : g.cell(i, j - 1);
            const std::size_t cb = g.cell(i, j);
            double r = fc[f] + ac[f] - (s.p[cb] - s.p[ca]) / h;
            if (sources_.u) {
                const Vec2 pos = xa ? g.xface_center(i, j) : g.yface_center(i, j);
                const Vec2 src = sources_.u(pos, s.t + dt);
                r += xa ? src.x : src.y;
            }
            rhs[k] = (uc[f] + dt * r) * (h * h / dt);
            x[k] = uc[f];
        }
        const SolveStats st =
            velocity_system(xa, dt).solve(rhs, x, config_.linear_tol, config_.max_cg_iterations);
        its += st.iterations;
        for (std::size_t k = 0; k < faces.size(); ++k) uc[faces[k]] = x[k];
    }

    // Projection: L delta = -(h^2/dt) div u*, u -= dt grad delta.
    const ScalarField div = divergence(*mesh_, s.u);
    const auto pcells = mesh_->pressure_cells();
    std::vector<double> b(pcells.size());
    double bnorm = 0;
    for (std::size_t k = 0; k < pcells.size(); ++k) {
        b[k] = -(h * h / dt) * div[pcells[k]];
        bnorm += b[k] * b[k];
    }
    bnorm = std::sqrt(bnorm);
    // Keeps max |div u| <= linear_tol / dt.
    double ptol = config_.linear_tol;
    if (bnorm > 0) ptol = std::min(ptol, config_.linear_tol * h * h / (dt * dt * bnorm));
    ptol = std::max(ptol, 1e-15);
    std::vector<double> delta(pcells.size(), 0.0);
    const SolveStats st = pressure_->solve(b, delta, ptol, config_.max_cg_iterations);
    its += st.iterations;
    for (std::size_t f : fluid_x_) {
        const int i = static_cast<int>(f % (g.nx + 1));
        const int j = static_cast<int>(f / (g.nx + 1));
        const double da = delta[mesh_->pressure_index(g.cell(i - 1, j))];
        const double db = delta[mesh_->pressure_index(g.cell(i, j))];
        s.u.u()[f] -= dt * (db - da) / h;
    }
    for (std::size_t f : fluid_y_) {
        const int i = static_cast<int>(f % g.nx);
        const int j = static_cast<int>(f / g.nx);
        const double da = delta[mesh_->pressure_index(g.cell(i, j - 1))];
        const double db = delta[mesh_->pressure_index(g.cell(i, j))];
        s.u.v()[f] -= dt * (db - da) / h;
    }
    for (std::size_t k = 0; k < pcells.size(); ++k) s.p[pcells[k]] += delta[k];
    extend_to_band(*mesh_, s.p);
    const double mean = pressure_mean(*mesh_, s.p);
    for (std::size_t k = 0; k < s.p.size(); ++k) {
        if (mesh_->active(k)) s.p[k] -= mean;
    }

    if (info) {
        info->iterations += its;
        info->pressure_tol = ptol;
        const ScalarField d = divergence(*mesh_, s.u);
        info->div_max = 0;
        for (std::size_t k = 0; k < d.size(); ++k) info->div_max = std::max(info->div_max, std::abs(d[k]));
        info->p_mean = pressure_mean(*mesh_, s.p);
        info->p_max = 0;
        for (std::size_t k = 0; k < s.p.size(); ++k) info->p_max = std::max(info->p_max, std::abs(s.p[k]));
    }
}

StepInfo Solver::step_fixed(SimState& s, double dt) {
    if (!(dt > 0)) throw SolverAbort("non-positive time step");
    StepInfo info;
    info.dt = dt;
    step_c(s, dt);
    step_n(s, dt, &info);
    step_u(s, dt, &info);
    s.t += dt;
    ++s.step;
    if (!s.n.all_finite() || !s.c.all_finite() || !s.u.all_finite() || !s.p.all_finite()) {
        std::ostringstream m;
        m << "non-finite values after step " << s.step << " (t = " << s.t << ", dt = " << dt << ")";
        throw SolverAbort(m.str());
    }
    return info;
}

StepInfo Solver::step(SimState& s) {
    double dt = cfl_dt(s);
    if (config_.dt_ladder && dt < config_.dt_max) {
        const double k = std::ceil(-4.0 * std::log2(dt / config_.dt_max) - 1e-9);
        dt = config_.dt_max * std::exp2(-k / 4.0);
    }
    const double remaining = config_.end_time - s.t;
    if (remaining > 0 && remaining < dt) dt = remaining;
    return step_fixed(s, dt);
}

void write_checkpoint(const std::string& path, const SimState& s) {
    const GridShape& g = s.n.shape();
    const Box box = g.box();
    auto block = [&](const char* name, const char* layout, int nx, int ny, const std::vector<double>& v) {
        return GridBlock{name, layout, nx, ny, box, v};
    };
    std::vector<GridBlock> blocks{
        block("n", "cell", g.nx, g.ny, s.n.values()),     block("c", "cell", g.nx, g.ny, s.c.values()),
        block("u", "xface", g.nx + 1, g.ny, s.u.u()),      block("v", "yface", g.nx, g.ny + 1, s.u.v()),
        block("p", "cell", g.nx, g.ny, s.p.values()),
        GridBlock{"time", "cell", 2, 1, Box{0, 0, 1, 1}, {s.t, static_cast<double>(s.step)}},
    };
    write_grid_file(path, blocks);
}

SimState read_checkpoint(const std::string& path, const GridShape& shape) {
    const auto blocks = read_grid_file(path);
    SimState s;
    s.n = ScalarField(shape);
    s.c = ScalarField(shape);
    s.p = ScalarField(shape);
    s.u = VectorField(shape);
    auto load = [&](const char* name, std::vector<double>& dst, int nx, int ny) {
        const GridBlock& b = find_block(blocks, name);
        if (b.nx != nx || b.ny != ny || !(b.bbox == shape.box())) {
            throw GridMismatchError(std::string("checkpoint block '") + name + "' does not match the grid");
        }
        dst = b.values;
    };
    load("n", s.n.values(), shape.nx, shape.ny);
    load("c", s.c.values(), shape.nx, shape.ny);
    load("p", s.p.values(), shape.nx, shape.ny);
    load("u", s.u.u(), shape.nx + 1, shape.ny);
    load("v", s.u.v(), shape.nx, shape.ny + 1);
    const GridBlock& tb = find_block(blocks, "time");
    if (tb.values.size() != 2) throw GridMismatchError("checkpoint time block malformed");
    s.t = tb.values[0];
    s.step = static_cast<long>(tb.values[1]);
    return s;
}

} // namespace chemofluid
