#include "chemofluid/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace chemofluid {

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

RandomNeumannField::RandomNeumannField(const LevelSetDomain& domain, std::uint64_t seed, int trial, int modes,
                                       double cutoff)
    : domain_(&domain), modes_(modes), cutoff_(cutoff) {
    const Box& b = domain.bbox();
    x0_ = b.x0;
    y0_ = b.y0;
    lx_ = b.x1 - b.x0;
    ly_ = b.y1 - b.y0;
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(trial + 1)));
    coeff_.resize(static_cast<std::size_t>(4 * (modes + 1) * (modes + 1)));
    for (int p = 0; p <= modes; ++p) {
        for (int q = 0; q <= modes; ++q) {
            const double decay = 1.0 / (1.0 + p * p + q * q);
            for (int m = 0; m < 4; ++m) {
                coeff_[static_cast<std::size_t>(4 * (p * (modes + 1) + q) + m)] =
                    (2 * unit_uniform(rng) - 1) * decay;
            }
        }
    }
}

double RandomNeumannField::z(Vec2 pt, Vec2* grad) const {
    const double kx = std::numbers::pi / lx_;
    const double ky = std::numbers::pi / ly_;
    const int m1 = modes_ + 1;
    std::vector<double> cx(m1), sx(m1), cy(m1), sy(m1);
    for (int p = 0; p < m1; ++p) {
        cx[p] = std::cos(p * kx * (pt.x - x0_));
        sx[p] = std::sin(p * kx * (pt.x - x0_));
        cy[p] = std::cos(p * ky * (pt.y - y0_));
        sy[p] = std::sin(p * ky * (pt.y - y0_));
    }
    double v = 0, gx = 0, gy = 0;
    for (int p = 0; p < m1; ++p) {
        for (int q = 0; q < m1; ++q) {
            const double* a = &coeff_[static_cast<std::size_t>(4 * (p * m1 + q))];
            v += a[0] * cx[p] * cy[q] + a[1] * cx[p] * sy[q] + a[2] * sx[p] * cy[q] + a[3] * sx[p] * sy[q];
            if (grad) {
                const double dp = p * kx;
                const double dq = q * ky;
                gx += dp * (-a[0] * sx[p] * cy[q] - a[1] * sx[p] * sy[q] + a[2] * cx[p] * cy[q] + a[3] * cx[p] * sy[q]);
                gy += dq * (-a[0] * cx[p] * sy[q] + a[1] * cx[p] * cy[q] - a[2] * sx[p] * sy[q] + a[3] * sx[p] * cy[q]);
            }
        }
    }
    if (grad) *grad = {gx, gy};
    return v;
}

double RandomNeumannField::operator()(Vec2 p) const {
    const double phi = (*domain_)(p);
    if (std::abs(phi) >= cutoff_) return z(p, nullptr);
    Vec2 gz;
    const double v = z(p, &gz);
    const Vec2 gp = domain_->gradient(p, 1e-5 * std::max(lx_, ly_));
    // zeta = 1 on |phi| <= cutoff/2, then a C^2 smootherstep down to 0.
    const double t = std::clamp(2 * std::abs(phi) / cutoff_ - 1, 0.0, 1.0);
    const double zeta = 1 - t * t * t * (10 - 15 * t + 6 * t * t);
    return v - zeta * phi * gz.dot(gp) / gp.dot(gp);
}

ScalarField RandomNeumannField::sample(const Mesh& mesh) const {
    const GridShape& g = mesh.shape();
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (mesh.active(g.cell(i, j))) out.at(i, j) = (*this)(g.cell_center(i, j));
        }
    }
    return out;
}

ScanSummary scan_inequalities(const LevelSetDomain& domain, MeshPtr mesh, const KineticsModel& model,
                              const ScanOptions& opt) {
    ScanSummary out;
    out.boundary_max = -std::numeric_limits<double>::infinity();
    const double c_top = opt.c_mean + opt.c_spread;
    const DerivedScalars derived = build_derived(model, 1e-10 * std::max(1.0, c_top), c_top);
    const Diagnostics diag(mesh, derived, 1.0);

    for (int trial = 0; trial < opt.trials; ++trial) {
        const RandomNeumannField field(domain, opt.seed, trial, opt.modes, opt.cutoff);
        const ScalarField s = field.sample(*mesh);
        const std::string tag = "/" + std::to_string(trial);

        InequalityReport ms = check_ms_lemma(*mesh, s, opt.c_check, trial);
        ms.id += tag;
        out.ms_max = std::max(out.ms_max, ms.violation);
        if (!ms.passed) ++out.ms_failures;
        out.reports.push_back(ms);

        double smax = 0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (mesh->active(k)) smax = std::max(smax, std::abs(s[k]));
        }
        ScalarField c(s.shape());
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (mesh->active(k)) c[k] = opt.c_mean + opt.c_spread * (smax > 0 ? s[k] / smax : 0.0);
        }

        InequalityReport bt = check_boundary_sign(diag, c, opt.c_check, trial);
        bt.id += tag;
        out.boundary_max = std::max(out.boundary_max, bt.violation);
        if (!bt.passed) ++out.boundary_positive;
        if (bt.lhs > 0) ++out.boundary_positive_raw;
        out.reports.push_back(bt);

        InequalityReport gh = check_gradient_hessian(diag, c, 0.0, 1e-12, trial);
        gh.id += tag;
        if (gh.rhs > 0) out.grad_hess_max_ratio = std::max(out.grad_hess_max_ratio, gh.lhs / gh.rhs);
        if (!gh.passed) ++out.grad_hess_failures;
        out.reports.push_back(gh);

        for (const TensorField& hess : {hessian(*mesh, s), jet_extended(*mesh, s).hess}) {
            InequalityReport pw = check_trace_bound(*mesh, hess, 1e-10, trial);
            pw.id += tag;
            out.trace_bound_max = std::max(out.trace_bound_max, pw.violation);
            if (!pw.passed) ++out.trace_bound_failures;
            out.reports.push_back(pw);
        }
    }
    return out;
}

} // namespace chemofluid
