#include "chemofluid/mms.hpp"

#include "chemofluid/errors.hpp"
#include "chemofluid/initial.hpp"

#include <cmath>
#include <limits>

namespace chemofluid {

namespace {

/// Building blocks on the unit disk: value, gradient and Laplacian.
struct Piece {
    double v, x, y, lap;
};

Piece radial(Vec2 p) {
    const double r2 = p.dot(p);
    return {2 * r2 - r2 * r2, 4 * p.x * (1 - r2), 4 * p.y * (1 - r2), 8 - 16 * r2};
}

Piece odd_x(Vec2 p) {
    const double r2 = p.dot(p);
    return {0.5 * p.x * (3 - r2), 1.5 - 1.5 * p.x * p.x - 0.5 * p.y * p.y, -p.x * p.y, -4 * p.x};
}

Piece odd_y(Vec2 p) {
    const double r2 = p.dot(p);
    return {0.5 * p.y * (3 - r2), -p.x * p.y, 1.5 - 0.5 * p.x * p.x - 1.5 * p.y * p.y, -4 * p.y};
}

double observed_order(double coarse, double fine, double ratio) {
    if (coarse < 1e-12 && fine < 1e-12) return std::numeric_limits<double>::infinity();
    return std::log(coarse / fine) / std::log(ratio);
}

} // namespace

ManufacturedSolution::ManufacturedSolution(const MmsOptions& opt)
    : kind_(opt.kind), amp_(opt.amplitude), stream_amp_(opt.stream_amplitude), gravity_(opt.gravity),
      kappa_(opt.kappa_ns) {}

double ManufacturedSolution::n(Vec2 p, double t) const {
    if (kind_ == MmsCase::heat) return 1.0;
    return 1 + amp_ * std::exp(-t) * (radial(p).v + odd_x(p).v);
}

double ManufacturedSolution::c(Vec2 p, double t) const {
    return 1 + amp_ * std::exp(-t) * (radial(p).v - odd_y(p).v);
}

double ManufacturedSolution::stream(Vec2 p, double t) const {
    if (kind_ == MmsCase::heat) return 0.0;
    const double s = 1 - p.dot(p);
    return stream_amp_ * std::exp(-t) * s * s;
}

Vec2 ManufacturedSolution::u(Vec2 p, double t) const {
    if (kind_ == MmsCase::heat) return {};
    const double k = 4 * stream_amp_ * std::exp(-t) * (1 - p.dot(p));
    return {-k * p.y, k * p.x};
}

double ManufacturedSolution::p(Vec2 q, double t) const {
    if (kind_ == MmsCase::heat) return 0.0;
    return 0.1 * std::exp(-t) * q.x * q.y;
}

KineticsModel ManufacturedSolution::model() const {
    if (kind_ == MmsCase::heat) {
        KineticsModel m;
        m.chi = ScalarFunction::constant(0.0);
        m.f = ScalarFunction::constant(0.0);
        m.gravity = 0.0;
        m.kappa_ns = 0.0;
        return m;
    }
    return KineticsModel::linear(gravity_, kappa_);
}

Sources ManufacturedSolution::sources() const {
    Sources s;
    const double amp = amp_;
    if (kind_ == MmsCase::heat) {
        s.c = [amp](Vec2 p, double t) {
            const double e = amp * std::exp(-t);
            const Piece w = radial(p);
            const Piece l = odd_y(p);
            return -e * (w.v - l.v) - e * (w.lap - l.lap);
        };
        return s;
    }
    const ManufacturedSolution self = *this;
    s.n = [self, amp](Vec2 p, double t) {
        const double e = amp * std::exp(-t);
        const Piece w = radial(p);
        const Piece m = odd_x(p);
        const Piece l = odd_y(p);
        const double n = self.n(p, t);
        const Vec2 gn{e * (w.x + m.x), e * (w.y + m.y)};
        const Vec2 gc{e * (w.x - l.x), e * (w.y - l.y)};
        const double lap_n = e * (w.lap + m.lap);
        const double lap_c = e * (w.lap - l.lap);
        const double n_t = -e * (w.v + m.v);
        return n_t + self.u(p, t).dot(gn) - lap_n + gn.dot(gc) + n * lap_c;
    };
    s.c = [self, amp](Vec2 p, double t) {
        const double e = amp * std::exp(-t);
        const Piece w = radial(p);
        const Piece l = odd_y(p);
        const Vec2 gc{e * (w.x - l.x), e * (w.y - l.y)};
        const double c_t = -e * (w.v - l.v);
        return c_t + self.u(p, t).dot(gc) - e * (w.lap - l.lap) + self.n(p, t) * self.c(p, t);
    };
    const double a = stream_amp_;
    const double grav = gravity_;
    const double kappa = kappa_;
    s.u = [self, a, grav, kappa](Vec2 p, double t) {
        const double e = a * std::exp(-t);
        const double x = p.x;
        const double y = p.y;
        const Vec2 vel = self.u(p, t);
        const double ux = 8 * e * x * y;
        const double uy = -4 * e * (1 - x * x - 3 * y * y);
        const double vx = 4 * e * (1 - 3 * x * x - y * y);
        const double vy = -8 * e * x * y;
        const Vec2 lap{32 * e * y, -32 * e * x};
        const Vec2 adv{vel.x * ux + vel.y * uy, vel.x * vx + vel.y * vy};
        const double pe = 0.1 * std::exp(-t);
        const Vec2 grad_p{pe * y, pe * x};
        const double n = self.n(p, t);
        return Vec2{-vel.x + grad_p.x - lap.x - kappa * adv.x, -vel.y + grad_p.y - lap.y - kappa * adv.y + n * grav};
    };
    return s;
}

MmsResult run_mms(const MmsOptions& opt) {
    if (opt.resolutions.size() < 2) throw ConfigError("mms needs at least 2 resolutions");
    const ManufacturedSolution ms(opt);
    MmsResult out;
    for (int res : opt.resolutions) {
        if (res < 8) throw ConfigError("mms resolution must be at least 8 cells per unit length");
        const double h = 1.0 / res;
        auto mesh = std::make_shared<Mesh>(classify_cells(LevelSetDomain::disk(1.0), h));
        const GridShape& g = mesh->shape();

        SimState s = make_state(*mesh);
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t k = g.cell(i, j);
                if (!mesh->active(k)) continue;
                s.n[k] = ms.n(g.cell_center(i, j), 0.0);
                s.c[k] = ms.c(g.cell_center(i, j), 0.0);
                if (mesh->interior(k)) s.p[k] = ms.p(g.cell_center(i, j), 0.0);
            }
        }
        s.n = mesh->make_cv_consistent(s.n);
        s.c = mesh->make_cv_consistent(s.c);
        if (ms.fluid()) {
            s.u = velocity_from_stream(*mesh, [&](Vec2 p) { return ms.stream(p, 0.0); });
            extend_to_band(*mesh, s.p);
            const double mean = pressure_mean(*mesh, s.p);
            for (std::size_t k = 0; k < s.p.size(); ++k) {
                if (mesh->active(k)) s.p[k] -= mean;
            }
        }

        SolverConfig cfg;
        cfg.fluid = ms.fluid();
        cfg.end_time = opt.end_time;
        cfg.dt_max = opt.dt_per_h * h;
        Solver solver(mesh, ms.model(), cfg, 1e-10);
        solver.set_sources(ms.sources());

        MmsLevel lvl;
        lvl.h = h;
        lvl.steps = std::max(1L, std::lround(opt.end_time / cfg.dt_max));
        lvl.dt = opt.end_time / static_cast<double>(lvl.steps);
        for (long k = 0; k < lvl.steps; ++k) solver.step_fixed(s, lvl.dt);

        const double t = s.t;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t k = g.cell(i, j);
                if (!mesh->active(k)) continue;
                lvl.err_n = std::max(lvl.err_n, std::abs(s.n[k] - ms.n(g.cell_center(i, j), t)));
                lvl.err_c = std::max(lvl.err_c, std::abs(s.c[k] - ms.c(g.cell_center(i, j), t)));
            }
        }
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i <= g.nx; ++i) {
                const std::size_t f = g.xface(i, j);
                if (mesh->fluid_xface(f)) {
                    lvl.err_u = std::max(lvl.err_u, std::abs(s.u.u()[f] - ms.u(g.xface_center(i, j), t).x));
                }
            }
        }
        for (int j = 0; j <= g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t f = g.yface(i, j);
                if (mesh->fluid_yface(f)) {
                    lvl.err_u = std::max(lvl.err_u, std::abs(s.u.v()[f] - ms.u(g.yface_center(i, j), t).y));
                }
            }
        }
        out.levels.push_back(lvl);
    }
    out.passed = true;
    for (std::size_t k = 1; k < out.levels.size(); ++k) {
        const MmsLevel& a = out.levels[k - 1];
        const MmsLevel& b = out.levels[k];
        const double ratio = a.h / b.h;
        const std::array<double, 3> o{observed_order(a.err_n, b.err_n, ratio), observed_order(a.err_c, b.err_c, ratio),
                                      observed_order(a.err_u, b.err_u, ratio)};
        for (double v : o) {
            if (!(v >= opt.min_order)) out.passed = false;
        }
        out.orders.push_back(o);
    }
    return out;
}

} // namespace chemofluid
