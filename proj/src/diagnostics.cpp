#include "chemofluid/diagnostics.hpp"

#include "chemofluid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace chemofluid {

namespace {

constexpr double kLogFloor = 1e-30;

double safe_log(double x) { return std::log(std::max(x, kLogFloor)); }

/// Fraction-weighted sum of f(cell) * h^2 over active cells.
template <class F>
double cell_sum(const Mesh& mesh, F&& f) {
    const auto& frac = mesh.geometry().volume_fraction;
    const double h2 = mesh.h() * mesh.h();
    double sum = 0;
    for (std::size_t k = 0; k < frac.size(); ++k) {
        if (frac[k] > 0) sum += frac[k] * f(k);
    }
    return sum * h2;
}

/// D^2 rho(c) = rho'(c) D^2 c + rho''(c) grad c (x) grad c with rho' = 1/g.
TensorField rho_hessian(const Mesh& mesh, const DerivedScalars& ds, const ScalarField& c, const CellJet& jet) {
    TensorField out(c.shape());
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (!mesh.active(k)) continue;
        const double g = ds.g(c[k]);
        const double r1 = 1.0 / g;
        const double r2 = -ds.dg(c[k]) / (g * g);
        const double gx = jet.grad.x[k];
        const double gy = jet.grad.y[k];
        out.xx[k] = r1 * jet.hess.xx[k] + r2 * gx * gx;
        out.xy[k] = r1 * jet.hess.xy[k] + r2 * gx * gy;
        out.yy[k] = r1 * jet.hess.yy[k] + r2 * gy * gy;
    }
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

const std::vector<std::string>& diagnostics_columns() {
    static const std::vector<std::string> cols{
        "time",        "mass",          "c_max",          "entropy_n",   "grad_psi_sq",  "fisher",
        "hess_rho",    "grad_c_4",      "u_l2",           "grad_u_l2",   "psi_l2",       "boundary_term",
        "ms_violation", "conv_n",       "identity_residual", "u_sup",    "n_min",        "n_max",
        "n_l65_sq",    "div_u_max",     "p_mean_abs",     "p_max_abs",   "clamped_fraction", "dt",
        "step",        "entropy",       "transport_a",    "transport_b", "consumption",  "concavity"};
    return cols;
}

Diagnostics::Diagnostics(MeshPtr mesh, const DerivedScalars& derived, double n_inf)
    : mesh_(std::move(mesh)), derived_(derived), n_inf_(n_inf) {}

double Diagnostics::mass(const ScalarField& n) const { return volume_integral(n, mesh_->geometry()); }

double Diagnostics::entropy_n(const ScalarField& n) const {
    return cell_sum(*mesh_, [&](std::size_t k) { return n[k] * safe_log(n[k]); });
}

ScalarField Diagnostics::psi_field(const ScalarField& c) const {
    ScalarField out(c.shape());
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (mesh_->active(k)) out[k] = derived_.psi(c[k]);
    }
    return out;
}

ScalarField Diagnostics::rho_field(const ScalarField& c) const {
    ScalarField out(c.shape());
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (mesh_->active(k)) out[k] = derived_.rho(c[k]);
    }
    return out;
}

double Diagnostics::grad_psi_sq(const ScalarField& c) const {
    double sum = 0;
    for (const Link& l : mesh_->links()) {
        const double d = derived_.psi(c[l.cell_b]) - derived_.psi(c[l.cell_a]);
        sum += l.aperture * d * d;
    }
    return sum;
}

double Diagnostics::entropy_functional(const ScalarField& n, const ScalarField& c) const {
    return entropy_n(n) + 0.5 * grad_psi_sq(c);
}

double Diagnostics::fisher(const ScalarField& n) const {
    double sum = 0;
    for (const Link& l : mesh_->links()) {
        sum += l.aperture * (n[l.cell_b] - n[l.cell_a]) * (safe_log(n[l.cell_b]) - safe_log(n[l.cell_a]));
    }
    return sum;
}

double Diagnostics::hess_rho(const ScalarField& c_cv) const {
    const ScalarField c = reconstruct_merged(*mesh_, c_cv);
    const TensorField hr = rho_hessian(*mesh_, derived_, c, jet_extended(*mesh_, c));
    return cell_sum(*mesh_, [&](std::size_t k) { return derived_.g(c[k]) * hr.frobenius_sq(k); });
}

double Diagnostics::grad_c_4(const ScalarField& c_cv) const {
    const CellGradient gc = jet_extended(*mesh_, reconstruct_merged(*mesh_, c_cv)).grad;
    return cell_sum(*mesh_, [&](std::size_t k) {
        const double q = gc.x[k] * gc.x[k] + gc.y[k] * gc.y[k];
        return q * q;
    });
}

double Diagnostics::u_l2(const VectorField& u) const {
    double sum = 0;
    for (double x : u.u()) sum += x * x;
    for (double x : u.v()) sum += x * x;
    return sum * mesh_->h() * mesh_->h();
}

double Diagnostics::grad_u_l2(const VectorField& u) const {
    const GridShape& g = mesh_->shape();
    double sum = 0;
    // Each fluid face contributes 4 u^2 - u * (sum of neighbours); the
    // neighbours of a no-slip face are zero.
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            const std::size_t f = g.xface(i, j);
            if (!mesh_->fluid_xface(f)) continue;
            double nb = 0;
            if (i + 1 <= g.nx) nb += u.u()[g.xface(i + 1, j)];
            if (i > 0) nb += u.u()[g.xface(i - 1, j)];
            if (j + 1 < g.ny) nb += u.u()[g.xface(i, j + 1)];
            if (j > 0) nb += u.u()[g.xface(i, j - 1)];
            sum += u.u()[f] * (4 * u.u()[f] - nb);
        }
    }
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t f = g.yface(i, j);
            if (!mesh_->fluid_yface(f)) continue;
            double nb = 0;
            if (i + 1 < g.nx) nb += u.v()[g.yface(i + 1, j)];
            if (i > 0) nb += u.v()[g.yface(i - 1, j)];
            if (j + 1 <= g.ny) nb += u.v()[g.yface(i, j + 1)];
            if (j > 0) nb += u.v()[g.yface(i, j - 1)];
            sum += u.v()[f] * (4 * u.v()[f] - nb);
        }
    }
    return sum;
}

double Diagnostics::psi_l2(const ScalarField& c) const {
    return cell_sum(*mesh_, [&](std::size_t k) {
        const double p = derived_.psi(c[k]);
        return p * p;
    });
}

double Diagnostics::boundary_term(const ScalarField& c) const {
    const BoundaryGradSq b = normal_derivative_of_gradsq(*mesh_, reconstruct_merged(*mesh_, c));
    const auto& segs = mesh_->geometry().segments;
    if (b.num_skipped == segs.size()) throw Error("boundary_term: every boundary segment was skipped");
    double sum = 0;
    for (std::size_t k = 0; k < segs.size(); ++k) {
        if (b.skipped[k]) continue;
        sum += b.dq_dnu[k] / derived_.g(b.value[k]) * segs[k].length;
    }
    return 0.5 * sum;
}

double Diagnostics::ms_violation(const ScalarField& c) const {
    const BoundaryGradSq b = normal_derivative_of_gradsq(*mesh_, reconstruct_merged(*mesh_, c));
    const double kappa = mesh_->geometry().kappa_max;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < b.dq_dnu.size(); ++k) {
        if (!b.skipped[k]) worst = std::max(worst, b.dq_dnu[k] - 2 * kappa * b.q[k]);
    }
    return std::isfinite(worst) ? worst : 0.0;
}

double Diagnostics::conv_n(const ScalarField& n) const {
    double m = 0;
    for (std::size_t k = 0; k < n.size(); ++k) {
        if (mesh_->active(k)) m = std::max(m, std::abs(n[k] - n_inf_));
    }
    return m;
}

IdentityTerms Diagnostics::identity_terms(const SimState& s) const {
    IdentityTerms t;
    const ScalarField& n = s.n;
    const ScalarField& c = s.c;
    const KineticsModel& m = derived_.model();
    t.entropy = entropy_functional(n, c);
    t.fisher = fisher(n);
    const ScalarField cr = reconstruct_merged(*mesh_, c);
    const CellJet jet = jet_extended(*mesh_, cr);
    const CellGradient& gc = jet.grad;
    const TensorField hr = rho_hessian(*mesh_, derived_, cr, jet);
    t.hess_rho = cell_sum(*mesh_, [&](std::size_t k) { return derived_.g(cr[k]) * hr.frobenius_sq(k); });
    const ScalarField lap = laplacian_neumann(*mesh_, c);
    const CellGradient uc = cell_velocity(*mesh_, s.u);
    t.transport_a = cell_sum(*mesh_, [&](std::size_t k) {
        const double cs = derived_.clamp(c[k]);
        const double g = derived_.g(cs);
        const double q = gc.x[k] * gc.x[k] + gc.y[k] * gc.y[k];
        const double udc = uc.x[k] * gc.x[k] + uc.y[k] * gc.y[k];
        return -0.5 * derived_.dg(cs) / (g * g) * q * udc;
    });
    t.transport_b = cell_sum(*mesh_, [&](std::size_t k) {
        const double cs = derived_.clamp(c[k]);
        const double udc = uc.x[k] * gc.x[k] + uc.y[k] * gc.y[k];
        return lap[k] / derived_.g(cs) * udc;
    });
    t.consumption = cell_sum(*mesh_, [&](std::size_t k) {
        const double cs = derived_.clamp(c[k]);
        const double g = derived_.g(cs);
        const double q = gc.x[k] * gc.x[k] + gc.y[k] * gc.y[k];
        return n[k] * (m.f(cs) * derived_.dg(cs) / (2 * g * g) - m.f.d1(cs) / g) * q;
    });
    t.concavity = cell_sum(*mesh_, [&](std::size_t k) {
        const double cs = derived_.clamp(c[k]);
        const double g = derived_.g(cs);
        const double q = gc.x[k] * gc.x[k] + gc.y[k] * gc.y[k];
        return 0.5 * derived_.d2g(cs) / (g * g) * q * q;
    });
    t.boundary = boundary_term(c);
    return t;
}

DiagnosticsRow Diagnostics::evaluate(const SimState& s, const StepInfo* last_step) const {
    DiagnosticsRow r;
    r.time = s.t;
    r.step = s.step;
    r.terms = identity_terms(s);
    r.mass = mass(s.n);
    r.entropy_n = entropy_n(s.n);
    r.grad_psi_sq = grad_psi_sq(s.c);
    r.fisher = r.terms.fisher;
    r.hess_rho = r.terms.hess_rho;
    r.grad_c_4 = grad_c_4(s.c);
    r.u_l2 = u_l2(s.u);
    r.grad_u_l2 = grad_u_l2(s.u);
    r.psi_l2 = psi_l2(s.c);
    r.boundary_term = r.terms.boundary;
    r.ms_violation = ms_violation(s.c);
    r.conv_n = conv_n(s.n);

    r.c_max = -std::numeric_limits<double>::infinity();
    r.n_min = std::numeric_limits<double>::infinity();
    r.n_max = -std::numeric_limits<double>::infinity();
    double clamped = 0;
    const auto& frac = mesh_->geometry().volume_fraction;
    double vol = 0;
    for (std::size_t k = 0; k < s.c.size(); ++k) {
        if (!mesh_->active(k)) continue;
        r.c_max = std::max(r.c_max, s.c[k]);
        r.n_min = std::min(r.n_min, s.n[k]);
        r.n_max = std::max(r.n_max, s.n[k]);
        vol += frac[k];
        if (s.c[k] < derived_.c_floor()) clamped += frac[k];
    }
    r.clamped_fraction = vol > 0 ? clamped / vol : 0;
    const double l65 = cell_sum(*mesh_, [&](std::size_t k) { return std::pow(std::abs(s.n[k]), 1.2); });
    r.n_l65_sq = std::pow(l65, 2.0 / 1.2);
    for (double x : s.u.u()) r.u_sup = std::max(r.u_sup, std::abs(x));
    for (double x : s.u.v()) r.u_sup = std::max(r.u_sup, std::abs(x));
    const ScalarField div = divergence(*mesh_, s.u);
    for (std::size_t k = 0; k < div.size(); ++k) r.div_u_max = std::max(r.div_u_max, std::abs(div[k]));
    if (mesh_->num_pressure() > 0) r.p_mean_abs = std::abs(pressure_mean(*mesh_, s.p));
    for (std::size_t k = 0; k < s.p.size(); ++k) {
        if (mesh_->active(k)) r.p_max_abs = std::max(r.p_max_abs, std::abs(s.p[k]));
    }
    if (last_step) r.dt = last_step->dt;
    return r;
}

std::vector<double> entropy_rate(const std::vector<DiagnosticsRow>& rows) {
    const std::size_t m = rows.size();
    std::vector<double> rate(m, 0.0);
    if (m < 2) return rate;
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t a = k == 0 ? 0 : k - 1;
        const std::size_t b = k + 1 == m ? m - 1 : k + 1;
        const double dt = rows[b].time - rows[a].time;
        rate[k] = dt > 0 ? (rows[b].terms.entropy - rows[a].terms.entropy) / dt : 0.0;
    }
    return rate;
}

std::vector<double> entropy_identity_residual(std::vector<DiagnosticsRow>& rows) {
    const std::vector<double> rate = entropy_rate(rows);
    std::vector<double> out(rows.size(), 0.0);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const IdentityTerms& t = rows[k].terms;
        const double res = std::abs(rate[k] + t.fisher + t.hess_rho - t.rhs_sum());
        const double scale = std::abs(rate[k]) + std::abs(t.fisher) + std::abs(t.hess_rho) +
                             std::abs(t.transport_a) + std::abs(t.transport_b) + std::abs(t.consumption) +
                             std::abs(t.concavity) + std::abs(t.boundary);
        out[k] = scale > 0 ? res / scale : 0.0;
        rows[k].identity_residual = out[k];
    }
    return out;
}

/// Fields whose oscillation over the domain is at the level of solver noise
/// carry no information about boundary derivatives.
bool below_noise(const Mesh& mesh, const ScalarField& w) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double mag = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (!mesh.active(k)) continue;
        lo = std::min(lo, w[k]);
        hi = std::max(hi, w[k]);
        mag = std::max(mag, std::abs(w[k]));
    }
    return !(hi - lo > kNoiseOscillation * mag);
}

double gradsq_derivative_scale(const Mesh& mesh, const ScalarField& w) {
    const CellJet jet = jet_extended(mesh, reconstruct_merged(mesh, w));
    double gmax = 0;
    double hmax = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (!mesh.active(k)) continue;
        gmax = std::max(gmax, std::hypot(jet.grad.x[k], jet.grad.y[k]));
        hmax = std::max(hmax, std::sqrt(jet.hess.frobenius_sq(k)));
    }
    return gmax * (mesh.geometry().kappa_max * gmax + hmax);
}

InequalityReport check_ms_lemma(const Mesh& mesh, const ScalarField& w, double c_check, double time) {
    if (below_noise(mesh, w)) {
        InequalityReport r;
        r.id = "ms_lemma";
        r.time = time;
        r.tolerance = c_check * std::sqrt(mesh.h());
        r.skipped = mesh.geometry().segments.size();
        return r;
    }
    const BoundaryGradSq b = normal_derivative_of_gradsq(mesh, w);
    const auto& segs = mesh.geometry().segments;
    const double kappa = mesh.geometry().kappa_max;
    InequalityReport r;
    r.id = "ms_lemma";
    r.time = time;
    r.skipped = b.num_skipped;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < segs.size(); ++k) {
        if (b.skipped[k]) continue;
        const double res = b.dq_dnu[k] - 2 * kappa * b.q[k];
        if (res > worst) {
            worst = res;
            r.lhs = b.dq_dnu[k];
            r.rhs = 2 * kappa * b.q[k];
            r.location = segs[k].midpoint;
        }
    }
    const double scale = gradsq_derivative_scale(mesh, w);
    r.constant = scale;
    r.violation = (std::isfinite(worst) && worst > 0 && scale > 0) ? worst / scale : 0.0;
    r.tolerance = c_check * std::sqrt(mesh.h());
    r.passed = r.violation <= r.tolerance;
    return r;
}

InequalityReport check_boundary_sign(const Diagnostics& d, const ScalarField& c_in, double c_check, double time) {
    const Mesh& mesh = d.mesh();
    if (below_noise(mesh, c_in)) {
        InequalityReport r;
        r.id = "boundary_sign";
        r.time = time;
        r.tolerance = c_check * std::sqrt(mesh.h());
        r.skipped = mesh.geometry().segments.size();
        return r;
    }
    const ScalarField c = reconstruct_merged(mesh, c_in);
    const BoundaryGradSq b = normal_derivative_of_gradsq(mesh, c);
    const auto& segs = mesh.geometry().segments;
    const double scale = gradsq_derivative_scale(mesh, c);
    double bound = 0;
    for (std::size_t k = 0; k < segs.size(); ++k) {
        if (!b.skipped[k]) bound += scale / d.derived().g(b.value[k]) * segs[k].length;
    }
    InequalityReport r;
    r.id = "boundary_sign";
    r.time = time;
    r.lhs = d.boundary_term(c_in);
    r.rhs = bound;
    r.violation = bound > 0 ? r.lhs / bound : 0.0;
    r.tolerance = c_check * std::sqrt(mesh.h());
    r.passed = r.violation <= r.tolerance;
    r.skipped = b.num_skipped;
    return r;
}

InequalityReport check_gradient_hessian(const Diagnostics& d, const ScalarField& c_in, double tol_rel, double tol_abs,
                                     double time) {
    const Mesh& mesh = d.mesh();
    const ScalarField c = reconstruct_merged(mesh, c_in);
    const DerivedScalars& ds = d.derived();
    const CellJet jet = jet_extended(mesh, c);
    const CellGradient& gc = jet.grad;
    const TensorField hr = rho_hessian(mesh, ds, c, jet);
    const auto& frac = mesh.geometry().volume_fraction;
    const double h2 = mesh.h() * mesh.h();
    double lhs = 0;
    double rhs = 0;
    double worst_density = -1;
    InequalityReport r;
    const GridShape& g = mesh.shape();
    for (std::size_t k = 0; k < frac.size(); ++k) {
        if (!(frac[k] > 0)) continue;
        const double cs = ds.clamp(c[k]);
        const double gv = ds.g(cs);
        const double dg = ds.dg(cs);
        const double q = gc.x[k] * gc.x[k] + gc.y[k] * gc.y[k];
        const double l = dg / (gv * gv * gv) * q * q;
        const double rr = gv / dg * hr.frobenius_sq(k);
        lhs += frac[k] * h2 * l;
        rhs += frac[k] * h2 * rr;
        if (l - rr > worst_density) {
            worst_density = l - rr;
            r.location = g.cell_center(static_cast<int>(k % g.nx), static_cast<int>(k / g.nx));
        }
    }
    const double constant = (2 + std::sqrt(2.0)) * (2 + std::sqrt(2.0));
    r.id = "gradient_hessian";
    r.time = time;
    r.lhs = lhs;
    r.rhs = constant * rhs;
    r.violation = lhs - r.rhs;
    r.tolerance = tol_rel * r.rhs + tol_abs;
    r.passed = r.violation <= r.tolerance;
    r.constant = constant;
    return r;
}

InequalityReport check_trace_bound(const Mesh& mesh, const TensorField& hess, double tol, double time) {
    InequalityReport r;
    r.id = "trace_bound";
    r.time = time;
    r.violation = -std::numeric_limits<double>::infinity();
    const GridShape& g = mesh.shape();
    for (std::size_t k = 0; k < g.cells(); ++k) {
        if (!mesh.active(k)) continue;
        const double tr = hess.trace(k);
        const double lhs = tr * tr;
        const double rhs = 2.0 * hess.frobenius_sq(k);
        if (lhs - rhs > r.violation) {
            r.violation = lhs - rhs;
            r.lhs = lhs;
            r.rhs = rhs;
            r.location = g.cell_center(static_cast<int>(k % g.nx), static_cast<int>(k / g.nx));
        }
    }
    if (!std::isfinite(r.violation)) r.violation = 0;
    r.tolerance = tol;
    r.passed = r.violation <= tol;
    return r;
}

InequalityReport check_energy_inequality(const std::vector<DiagnosticsRow>& rows, double slack_rel) {
    InequalityReport r;
    r.id = "entropy_energy";
    const std::vector<double> rate = entropy_rate(rows);
    double c_fit = 0;
    double scale = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double lhs = rate[k] + rows[k].fisher + 0.5 * rows[k].hess_rho;
        const double rhs = rows[k].grad_u_l2 + rows[k].psi_l2;
        scale = std::max(scale, std::abs(rate[k]) + std::abs(rows[k].fisher) + std::abs(rows[k].hess_rho));
        if (rhs > 0 && lhs > 0) c_fit = std::max(c_fit, lhs / rhs);
    }
    double slack = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double lhs = rate[k] + rows[k].fisher + 0.5 * rows[k].hess_rho;
        const double rhs = rows[k].grad_u_l2 + rows[k].psi_l2;
        const double s = lhs - c_fit * rhs;
        slack = std::max(slack, s);
        if (s > worst) {
            worst = s;
            r.lhs = lhs;
            r.rhs = rhs;
            r.time = rows[k].time;
        }
    }
    r.constant = c_fit;
    r.violation = slack;
    r.tolerance = slack_rel * scale;
    r.passed = std::isfinite(c_fit) && slack <= r.tolerance;
    return r;
}

InequalityReport check_velocity_energy(const std::vector<DiagnosticsRow>& rows, double gravity, double slack_rel) {
    InequalityReport r;
    r.id = "velocity_energy";
    const std::size_t m = rows.size();
    double c_fit = 0;
    double slack = 0;
    double scale = 0;
    double sup_u = 0;
    double integral = 0;
    for (std::size_t k = 0; k < m; ++k) {
        sup_u = std::max(sup_u, rows[k].u_l2);
        if (k > 0) integral += 0.5 * (rows[k].grad_u_l2 + rows[k - 1].grad_u_l2) * (rows[k].time - rows[k - 1].time);
    }
    for (std::size_t k = 0; k < m && m >= 2; ++k) {
        const std::size_t a = k == 0 ? 0 : k - 1;
        const std::size_t b = k + 1 == m ? m - 1 : k + 1;
        const double dt = rows[b].time - rows[a].time;
        const double rate = dt > 0 ? (rows[b].u_l2 - rows[a].u_l2) / dt : 0.0;
        const double lhs = 0.5 * rate + 0.5 * rows[k].grad_u_l2;
        const double rhs = gravity * gravity * rows[k].n_l65_sq;
        scale = std::max(scale, std::abs(0.5 * rate) + 0.5 * rows[k].grad_u_l2);
        if (rhs > 0) {
            if (lhs > 0) c_fit = std::max(c_fit, lhs / rhs);
        } else {
            // Unforced: the kinetic energy must not grow.
            slack = std::max(slack, rate);
        }
    }
    r.constant = c_fit;
    r.lhs = sup_u;
    r.rhs = integral;
    r.violation = slack;
    r.tolerance = slack_rel * std::max(scale, 1e-300);
    r.passed = std::isfinite(c_fit) && slack <= r.tolerance;
    if (!rows.empty()) r.time = rows.back().time;
    return r;
}

ConvergenceVerdict convergence_monitor(const std::vector<DiagnosticsRow>& rows, double rel_threshold,
                                       double abs_floor, double c_tol) {
    ConvergenceVerdict v;
    if (rows.empty()) {
        v.reason = "no rows";
        return v;
    }
    const DiagnosticsRow& first = rows.front();
    const DiagnosticsRow& last = rows.back();
    auto ratio = [](double a, double b) { return b > 0 ? a / b : (a > 0 ? std::numeric_limits<double>::infinity() : 0.0); };
    v.conv_n_ratio = ratio(last.conv_n, first.conv_n);
    v.c_max_ratio = ratio(last.c_max, first.c_max);
    v.u_sup_ratio = ratio(last.u_sup, first.u_sup);
    auto small = [&](double final_value, double initial) {
        return final_value <= std::max(rel_threshold * initial, abs_floor);
    };
    const double c0 = std::max(first.c_max, 0.0);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (rows[k].c_max > rows[k - 1].c_max + c_tol * c0) v.c_max_monotone = false;
    }
    const std::size_t half = rows.size() / 2;
    auto tail_ok = [&](auto get) {
        for (std::size_t k = std::max<std::size_t>(half, 1); k < rows.size(); ++k) {
            if (get(rows[k]) > get(rows[k - 1]) + abs_floor) return false;
        }
        return true;
    };
    v.tail_monotone = tail_ok([](const DiagnosticsRow& r) { return r.conv_n; }) &&
                      tail_ok([](const DiagnosticsRow& r) { return r.c_max; }) &&
                      tail_ok([](const DiagnosticsRow& r) { return r.u_sup; });
    const bool n_ok = small(last.conv_n, first.conv_n);
    const bool c_ok = small(last.c_max, first.c_max);
    const bool u_ok = small(last.u_sup, first.u_sup);
    v.passed = n_ok && c_ok && u_ok && v.c_max_monotone && v.tail_monotone;
    if (!n_ok) v.reason = "||n - n_inf|| did not decay enough";
    else if (!c_ok) v.reason = "||c|| did not decay enough";
    else if (!u_ok) v.reason = "||u|| did not decay enough";
    else if (!v.c_max_monotone) v.reason = "c_max increased";
    else if (!v.tail_monotone) v.reason = "a sup-norm series is not monotone over the last half";
    return v;
}

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRow>& rows) {
    const auto& cols = diagnostics_columns();
    for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k];
    os << '\n';
    for (const DiagnosticsRow& r : rows) {
        const double vals[] = {r.time,        r.mass,          r.c_max,      r.entropy_n,        r.grad_psi_sq,
                               r.fisher,      r.hess_rho,      r.grad_c_4,   r.u_l2,             r.grad_u_l2,
                               r.psi_l2,      r.boundary_term, r.ms_violation, r.conv_n,         r.identity_residual,
                               r.u_sup,       r.n_min,         r.n_max,      r.n_l65_sq,         r.div_u_max,
                               r.p_mean_abs,  r.p_max_abs,     r.clamped_fraction, r.dt,         static_cast<double>(r.step),
                               r.terms.entropy, r.terms.transport_a, r.terms.transport_b, r.terms.consumption,
                               r.terms.concavity};
        for (std::size_t k = 0; k < std::size(vals); ++k) os << (k ? "," : "") << fmt(vals[k]);
        os << '\n';
    }
}

void write_inequality_csv(std::ostream& os, const std::vector<InequalityReport>& reports) {
    os << "id,time,lhs,rhs,violation,tolerance,passed\n";
    for (const InequalityReport& r : reports) {
        os << r.id << ',' << fmt(r.time) << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ',' << fmt(r.violation) << ','
           << fmt(r.tolerance) << ',' << (r.passed ? 1 : 0) << '\n';
    }
}

} // namespace chemofluid
