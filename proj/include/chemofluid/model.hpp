// Chemotactic sensitivity chi(c), consumption rate f(c), the
// gravitational potential, and the derived functions
//
//     g(s)   = f(s) / chi(s)
//     psi(s) = int_1^s dsigma / sqrt(g(sigma))
//     rho(s) = int_1^s dsigma / g(sigma)
//
// used by the entropy diagnostics.

#pragma once

#include "chemofluid/fields.hpp"
#include "chemofluid/grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace chemofluid {

/// A scalar function of the concentration with its first two derivatives.
struct ScalarFunction {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;

    double operator()(double s) const { return value(s); }

    static ScalarFunction constant(double c);
    /// sum_k coeffs[k] s^k
    static ScalarFunction polynomial(std::vector<double> coeffs);
    /// a s / (1 + b s)
    static ScalarFunction saturating(double a, double b);
    /// a / (1 + b s)
    static ScalarFunction decaying(double a, double b);
};

struct KineticsModel {
    ScalarFunction chi;
    ScalarFunction f;
    /// Potential phi(x, y) = -G y, so grad phi = (0, -G).
    double gravity = 1.0;
    /// Coefficient of the (u . grad) u term; 0 gives the Stokes system.
    double kappa_ns = 0.0;

    double potential(Vec2 p) const { return -gravity * p.y; }
    Vec2 potential_gradient(Vec2) const { return {0.0, -gravity}; }

    /// chi = 1, f(s) = s.
    static KineticsModel linear(double gravity = 1.0, double kappa_ns = 0.0);
};

struct ConditionResult {
    std::string name;
    bool passed = true;
    double worst_s = 0; ///< sample where the margin is smallest
    double margin = 0;  ///< signed slack of the condition at worst_s (>= 0 passes)
};

struct AssumptionReport {
    double c_max = 0;
    std::size_t samples = 0;
    std::vector<ConditionResult> conditions;

    bool passed() const;
    /// Name of the first failing condition, empty when all pass.
    std::string first_failure() const;
};

/// Scan [0, c_max] at `samples` equispaced points and check
/// chi > 0, f(0) = 0, f > 0 on (0, c_max], (f/chi)' > 0, (f/chi)'' <= 0,
/// (chi f)' >= 0.
AssumptionReport validate_assumptions(const KineticsModel& model, double c_max, std::size_t samples = 10000);

/// g, g', g'' of a model, evaluated analytically from chi and f.
double g_of(const KineticsModel& m, double s);
double dg_of(const KineticsModel& m, double s);
double d2g_of(const KineticsModel& m, double s);

/// Tabulated psi and rho on [c_floor, max(1, c_max)] with cubic Hermite
/// interpolation through exact slopes. Arguments are clamped to the table.
class DerivedScalars {
public:
    DerivedScalars(const KineticsModel& model, double c_floor, double c_max);

    double c_floor() const { return c_floor_; }
    double s_max() const { return s_max_; }
    double clamp(double s) const;

    double g(double s) const { return g_of(*model_, clamp(s)); }
    double dg(double s) const { return dg_of(*model_, clamp(s)); }
    double d2g(double s) const { return d2g_of(*model_, clamp(s)); }
    double psi(double s) const;
    double rho(double s) const;
    double dpsi(double s) const;
    double drho(double s) const;

    /// inf / sup of g' on the tabulated range.
    double c1() const { return c1_; }
    double c2() const { return c2_; }

    const std::vector<double>& nodes() const { return nodes_; }
    const KineticsModel& model() const { return *model_; }

private:
    double interpolate(const std::vector<double>& val, const std::vector<double>& slope, double s) const;

    std::shared_ptr<const KineticsModel> model_;
    double c_floor_;
    double s_max_;
    std::vector<double> nodes_;
    std::vector<double> psi_;
    std::vector<double> dpsi_;
    std::vector<double> rho_;
    std::vector<double> drho_;
    double c1_ = 0;
    double c2_ = 0;
};

/// Default c_floor = 1e-10 * max(1, c_max).
DerivedScalars build_derived(const KineticsModel& model, double c_floor, double c_max);

/// Adaptive Simpson quadrature of f on [a, b] to relative tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

/// n interpolated to fluid faces times grad phi; zero on no-slip faces.
VectorField buoyancy_force(const Mesh& mesh, const ScalarField& n, const KineticsModel& model);

} // namespace chemofluid
