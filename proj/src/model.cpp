#include "chemofluid/model.hpp"

#include "chemofluid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace chemofluid {

ScalarFunction ScalarFunction::constant(double c) {
    std::ostringstream name;
    name << "constant(" << c << ")";
    return {name.str(), [c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

ScalarFunction ScalarFunction::polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) coeffs.push_back(0.0);
    std::ostringstream name;
    name << "poly(";
    for (std::size_t k = 0; k < coeffs.size(); ++k) name << (k ? "," : "") << coeffs[k];
    name << ")";
    auto horner = [](const std::vector<double>& a, double s) {
        double r = 0;
        for (auto it = a.rbegin(); it != a.rend(); ++it) r = r * s + *it;
        return r;
    };
    auto derive = [](const std::vector<double>& a) {
        std::vector<double> d;
        for (std::size_t k = 1; k < a.size(); ++k) d.push_back(static_cast<double>(k) * a[k]);
        if (d.empty()) d.push_back(0.0);
        return d;
    };
    const auto d1 = derive(coeffs);
    const auto d2 = derive(d1);
    return {name.str(), [=](double s) { return horner(coeffs, s); }, [=](double s) { return horner(d1, s); },
            [=](double s) { return horner(d2, s); }};
}

ScalarFunction ScalarFunction::saturating(double a, double b) {
    std::ostringstream name;
    name << "saturating(" << a << "," << b << ")";
    return {name.str(), [=](double s) { return a * s / (1 + b * s); },
            [=](double s) { return a / ((1 + b * s) * (1 + b * s)); },
            [=](double s) { return -2 * a * b / std::pow(1 + b * s, 3); }};
}

ScalarFunction ScalarFunction::decaying(double a, double b) {
    std::ostringstream name;
    name << "decaying(" << a << "," << b << ")";
    return {name.str(), [=](double s) { return a / (1 + b * s); },
            [=](double s) { return -a * b / ((1 + b * s) * (1 + b * s)); },
            [=](double s) { return 2 * a * b * b / std::pow(1 + b * s, 3); }};
}

KineticsModel KineticsModel::linear(double gravity, double kappa_ns) {
    return {ScalarFunction::constant(1.0), ScalarFunction::polynomial({0.0, 1.0}), gravity, kappa_ns};
}

double g_of(const KineticsModel& m, double s) { return m.f(s) / m.chi(s); }

double dg_of(const KineticsModel& m, double s) {
    const double chi = m.chi(s);
    return (m.f.d1(s) * chi - m.f(s) * m.chi.d1(s)) / (chi * chi);
}

double d2g_of(const KineticsModel& m, double s) {
    const double chi = m.chi(s);
    const double f = m.f(s);
    const double num1 = m.f.d1(s) * chi - f * m.chi.d1(s);
    return (m.f.d2(s) * chi - f * m.chi.d2(s)) / (chi * chi) - 2.0 * m.chi.d1(s) * num1 / (chi * chi * chi);
}

bool AssumptionReport::passed() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const ConditionResult& c) { return c.passed; });
}

std::string AssumptionReport::first_failure() const {
    for (const auto& c : conditions) {
        if (!c.passed) return c.name;
    }
    return {};
}

AssumptionReport validate_assumptions(const KineticsModel& model, double c_max, std::size_t samples) {
    if (!(c_max > 0)) throw ValidationError("validate_assumptions: c_max must be positive");
    if (samples < 2) throw ValidationError("validate_assumptions: need at least 2 samples");
    AssumptionReport rep;
    rep.c_max = c_max;
    rep.samples = samples;

    // Track the minimum of a margin function over the scan.
    struct Tracker {
        ConditionResult r;
        void see(double s, double margin) {
            if (margin < r.margin || !std::isfinite(margin)) {
                r.margin = margin;
                r.worst_s = s;
            }
        }
    };
    auto make = [](const char* name) {
        Tracker t;
        t.r.name = name;
        t.r.margin = std::numeric_limits<double>::infinity();
        return t;
    };
    Tracker chi_pos = make("chi>0");
    Tracker f_zero = make("f(0)=0");
    Tracker f_pos = make("f>0");
    Tracker g_inc = make("(f/chi)'>0");
    Tracker g_concave = make("(f/chi)''<=0");
    Tracker chif_inc = make("(chi*f)'>=0");

    f_zero.see(0.0, 1e-12 - std::abs(model.f(0.0)));
    for (std::size_t k = 0; k < samples; ++k) {
        const double s = c_max * static_cast<double>(k) / static_cast<double>(samples - 1);
        chi_pos.see(s, model.chi(s));
        if (s > 0) f_pos.see(s, model.f(s));
        g_inc.see(s, dg_of(model, s));
        g_concave.see(s, 1e-10 - d2g_of(model, s));
        chif_inc.see(s, model.chi.d1(s) * model.f(s) + model.chi(s) * model.f.d1(s) + 1e-10);
    }
    chi_pos.r.passed = chi_pos.r.margin > 0;
    f_zero.r.passed = f_zero.r.margin > 0;
    f_pos.r.passed = f_pos.r.margin > 0;
    g_inc.r.passed = g_inc.r.margin > 0;
    g_concave.r.passed = g_concave.r.margin >= 0;
    chif_inc.r.passed = chif_inc.r.margin >= 0;
    rep.conditions = {chi_pos.r, f_zero.r, f_pos.r, g_inc.r, g_concave.r, chif_inc.r};
    for (auto& c : rep.conditions) {
        if (!std::isfinite(c.margin)) c.passed = false;
    }
    return rep;
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6 * (fm + 4 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15 * tol) return left + right + delta / 15;
    if (depth <= 0) throw ValidationError("adaptive Simpson quadrature did not converge");
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    const double abs_tol = tol * std::max(std::abs(whole), 1e-300);
    return simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, 60);
}

DerivedScalars::DerivedScalars(const KineticsModel& model, double c_floor, double c_max)
    : model_(std::make_shared<KineticsModel>(model)), c_floor_(c_floor), s_max_(std::max(1.0, c_max)) {
    if (!(c_floor > 0) || !(c_floor < 1)) throw ValidationError("c_floor must lie in (0, 1)");
    if (!(c_max > 0)) throw ValidationError("c_max must be positive");

    constexpr double kPerDecade = 128;
    auto geometric = [&](double lo, double hi, std::vector<double>& out) {
        const int count = std::max(2, static_cast<int>(std::ceil(kPerDecade * std::log10(hi / lo))));
        for (int k = 0; k <= count; ++k) out.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / count));
        out.back() = hi;
    };
    geometric(c_floor_, 1.0, nodes_);
    const std::size_t anchor = nodes_.size() - 1;
    nodes_[anchor] = 1.0;
    if (s_max_ > 1.0) {
        std::vector<double> upper;
        geometric(1.0, s_max_, upper);
        nodes_.insert(nodes_.end(), upper.begin() + 1, upper.end());
    }

    const std::size_t n = nodes_.size();
    psi_.assign(n, 0.0);
    rho_.assign(n, 0.0);
    dpsi_.resize(n);
    drho_.resize(n);
    auto inv_sqrt_g = [this](double s) { return 1.0 / std::sqrt(g_of(*model_, s)); };
    auto inv_g = [this](double s) { return 1.0 / g_of(*model_, s); };
    for (std::size_t k = 0; k < n; ++k) {
        const double g = g_of(*model_, nodes_[k]);
        if (!(g > 0)) throw ValidationError("g = f/chi must be positive on the tabulated range");
        dpsi_[k] = 1.0 / std::sqrt(g);
        drho_[k] = 1.0 / g;
    }
    constexpr double kTol = 1e-9;
    for (std::size_t k = anchor + 1; k < n; ++k) {
        psi_[k] = psi_[k - 1] + adaptive_simpson(inv_sqrt_g, nodes_[k - 1], nodes_[k], kTol);
        rho_[k] = rho_[k - 1] + adaptive_simpson(inv_g, nodes_[k - 1], nodes_[k], kTol);
    }
    for (std::size_t k = anchor; k-- > 0;) {
        psi_[k] = psi_[k + 1] - adaptive_simpson(inv_sqrt_g, nodes_[k], nodes_[k + 1], kTol);
        rho_[k] = rho_[k + 1] - adaptive_simpson(inv_g, nodes_[k], nodes_[k + 1], kTol);
    }

    // Fritsch-Carlson limiter keeps the Hermite interpolant monotone; with the
    // exact slopes and a dense table it is inactive in practice.
    auto limit = [&](const std::vector<double>& val, std::vector<double>& slope) {
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const double secant = (val[k + 1] - val[k]) / (nodes_[k + 1] - nodes_[k]);
            const double a = slope[k] / secant;
            const double b = slope[k + 1] / secant;
            const double r2 = a * a + b * b;
            if (r2 > 9.0) {
                const double tau = 3.0 / std::sqrt(r2);
                slope[k] = tau * a * secant;
                slope[k + 1] = tau * b * secant;
            }
        }
    };
    limit(psi_, dpsi_);
    limit(rho_, drho_);

    c1_ = std::numeric_limits<double>::infinity();
    c2_ = -std::numeric_limits<double>::infinity();
    for (double s : nodes_) {
        const double d = dg_of(*model_, s);
        c1_ = std::min(c1_, d);
        c2_ = std::max(c2_, d);
    }
}

double DerivedScalars::clamp(double s) const { return std::clamp(s, c_floor_, s_max_); }

double DerivedScalars::interpolate(const std::vector<double>& val, const std::vector<double>& slope, double s) const {
    s = clamp(s);
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
    std::size_t k = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    if (k + 1 >= nodes_.size()) k = nodes_.size() - 2;
    const double x0 = nodes_[k];
    const double dx = nodes_[k + 1] - x0;
    const double t = (s - x0) / dx;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * val[k] + h10 * dx * slope[k] + h01 * val[k + 1] + h11 * dx * slope[k + 1];
}

double DerivedScalars::psi(double s) const { return interpolate(psi_, dpsi_, s); }
double DerivedScalars::rho(double s) const { return interpolate(rho_, drho_, s); }
double DerivedScalars::dpsi(double s) const { return 1.0 / std::sqrt(g(s)); }
double DerivedScalars::drho(double s) const { return 1.0 / g(s); }

DerivedScalars build_derived(const KineticsModel& model, double c_floor, double c_max) {
    const AssumptionReport rep = validate_assumptions(model, c_max);
    if (!rep.passed()) throw ValidationError("model violates " + rep.first_failure());
    return DerivedScalars(model, c_floor, c_max);
}

VectorField buoyancy_force(const Mesh& mesh, const ScalarField& n, const KineticsModel& model) {
    const GridShape& g = mesh.shape();
    require_same_grid(n.shape(), g, "buoyancy_force");
    VectorField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) {
            const std::size_t f = g.xface(i, j);
            if (!mesh.fluid_xface(f)) continue;
            const double nf = 0.5 * (n.at(i - 1, j) + n.at(i, j));
            out.u()[f] = nf * model.potential_gradient(g.xface_center(i, j)).x;
        }
    }
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t f = g.yface(i, j);
            if (!mesh.fluid_yface(f)) continue;
            const double nf = 0.5 * (n.at(i, j - 1) + n.at(i, j));
            out.v()[f] = nf * model.potential_gradient(g.yface_center(i, j)).y;
        }
    }
    return out;
}

} // namespace chemofluid
