// Functionals, entropy-identity bookkeeping and inequality checks
// evaluated on simulation snapshots.
//
// Discrete conventions:
//  - cell quadrature is fraction weighted (volume_integral);
//  - Dirichlet-type energies use links:  int |grad s|^2 ~ sum a (s_b - s_a)^2,
//    and the Fisher information uses the matching logarithmic form
//    sum a (n_b - n_a)(log n_b - log n_a);
//  - |grad u|^2 is the face-difference energy u^T (4 I - N) u summed over both
//    MAC components, with no-slip faces counted as zero neighbours;
//  - arguments of g, psi, rho are clamped at c_floor; the clamped share of
//    the domain is reported.

#pragma once

#include "chemofluid/fields.hpp"
#include "chemofluid/model.hpp"
#include "chemofluid/solver.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace chemofluid {

/// Right-hand side terms of the entropy identity at one snapshot (F(n) = n).
struct IdentityTerms {
    double entropy = 0;     ///< int n log n + 1/2 int |grad psi(c)|^2
    double fisher = 0;      ///< int |grad n|^2 / n
    double hess_rho = 0;    ///< int g(c) |D^2 rho(c)|^2
    double transport_a = 0; ///< -1/2 int g'/g^2 |grad c|^2 (u . grad c)
    double transport_b = 0; ///< int (1/g) lap c (u . grad c)
    double consumption = 0; ///< int n (f g'/(2 g^2) - f'/g) |grad c|^2
    double concavity = 0;   ///< 1/2 int g''/g^2 |grad c|^4
    double boundary = 0;    ///< 1/2 surface int (1/g) d|grad c|^2/d nu

    double rhs_sum() const { return transport_a + transport_b + consumption + concavity + boundary; }
};

struct DiagnosticsRow {
    double time = 0;
    double mass = 0;
    double c_max = 0;
    double entropy_n = 0;
    double grad_psi_sq = 0;
    double fisher = 0;
    double hess_rho = 0;
    double grad_c_4 = 0;
    double u_l2 = 0;
    double grad_u_l2 = 0;
    double psi_l2 = 0;
    double boundary_term = 0;
    double ms_violation = 0;
    double conv_n = 0;
    double identity_residual = 0; ///< normalised; filled once neighbours exist
    // Extras.
    double u_sup = 0;
    double n_min = 0;
    double n_max = 0;
    double n_l65_sq = 0; ///< ||n||^2 in L^{6/5}
    double div_u_max = 0;
    double p_mean_abs = 0;
    double p_max_abs = 0;
    double clamped_fraction = 0;
    double dt = 0;
    long step = 0;
    IdentityTerms terms;
};

/// Column names of the diagnostics CSV in output order.
const std::vector<std::string>& diagnostics_columns();

class Diagnostics {
public:
    /// n_inf is the mean of the initial density.
    Diagnostics(MeshPtr mesh, const DerivedScalars& derived, double n_inf);

    const Mesh& mesh() const { return *mesh_; }
    const DerivedScalars& derived() const { return derived_; }
    double n_inf() const { return n_inf_; }

    double mass(const ScalarField& n) const;
    double entropy_n(const ScalarField& n) const;
    double grad_psi_sq(const ScalarField& c) const;
    /// Entropy functional int n log n + 1/2 int |grad psi(c)|^2.
    double entropy_functional(const ScalarField& n, const ScalarField& c) const;
    double fisher(const ScalarField& n) const;
    double hess_rho(const ScalarField& c) const;
    double grad_c_4(const ScalarField& c) const;
    double u_l2(const VectorField& u) const;
    double grad_u_l2(const VectorField& u) const;
    double psi_l2(const ScalarField& c) const;
    /// 1/2 surface int (1/g(c)) d|grad c|^2/d nu over non-skipped segments.
    /// Throws Error when every segment is skipped.
    double boundary_term(const ScalarField& c) const;
    /// max over segments of d|grad c|^2/d nu - 2 kappa_max |grad c|^2.
    double ms_violation(const ScalarField& c) const;
    double conv_n(const ScalarField& n) const;

    IdentityTerms identity_terms(const SimState& s) const;

    /// Full row for a snapshot; identity_residual is left at zero.
    DiagnosticsRow evaluate(const SimState& s, const StepInfo* last_step = nullptr) const;

    /// rho(c) composed cellwise, used for the Hessian-based terms.
    ScalarField rho_field(const ScalarField& c) const;
    ScalarField psi_field(const ScalarField& c) const;

private:
    MeshPtr mesh_;
    DerivedScalars derived_;
    double n_inf_;
};

/// Normalised entropy-identity residual per row:
/// |dE/dt + fisher + hess_rho - sum(rhs)| / (|dE/dt| + fisher + hess_rho + sum|rhs_i|).
/// dE/dt uses centred differences of the snapshots (one-sided at the ends).
/// Writes the result into rows[k].identity_residual and returns it.
std::vector<double> entropy_identity_residual(std::vector<DiagnosticsRow>& rows);

/// Time derivative of the entropy functional at each row.
std::vector<double> entropy_rate(const std::vector<DiagnosticsRow>& rows);

struct InequalityReport {
    std::string id;
    double time = 0;
    double lhs = 0;
    double rhs = 0;
    double violation = 0; ///< quantity compared against the tolerance
    double tolerance = 0;
    bool passed = true;
    Vec2 location{};
    std::size_t skipped = 0;
    double constant = 0;  ///< fitted constant where applicable
};

/// Relative oscillation (max - min) / max|w| at or below which the boundary
/// checks skip every segment and pass.
inline constexpr double kNoiseOscillation = 1e-7;

/// Size of d|grad w|^2/d nu = 2 grad w . (D^2 w nu) for the field:
/// sup|grad w| (kappa_max sup|grad w| + sup|D^2 w|) over active cells.
double gradsq_derivative_scale(const Mesh& mesh, const ScalarField& w);

/// d|grad w|^2/d nu <= 2 kappa_max |grad w|^2 on the boundary. The violation
/// is max(0, max_k residual_k) / gradsq_derivative_scale(w), compared with
/// c_check * h^{1/2}; `constant` holds the scale.
InequalityReport check_ms_lemma(const Mesh& mesh, const ScalarField& w, double c_check, double time = 0);

/// Sign of the boundary term: violation is boundary_term / (surface int
/// S / g(c)) with S = gradsq_derivative_scale(c), compared with
/// c_check * h^{1/2}. lhs holds the raw boundary term, rhs the scale.
InequalityReport check_boundary_sign(const Diagnostics& d, const ScalarField& c, double c_check, double time = 0);

/// int g'/g^3 |grad c|^4 <= (2 + sqrt 2)^2 int (g/g') |D^2 rho(c)|^2.
InequalityReport check_gradient_hessian(const Diagnostics& d, const ScalarField& c, double tol_rel = 0,
                                     double tol_abs = 1e-12, double time = 0);

/// Cellwise |trace H|^2 <= 2 |H|^2 + tol for a Hessian field.
InequalityReport check_trace_bound(const Mesh& mesh, const TensorField& hess, double tol = 1e-10, double time = 0);

/// Smallest C >= 0 with dE/dt + fisher + 1/2 hess_rho <= C (grad_u_l2 + psi_l2)
/// + slack at every row; passes when slack <= slack_rel * scale of the terms.
InequalityReport check_energy_inequality(const std::vector<DiagnosticsRow>& rows, double slack_rel = 1e-6);

/// 1/2 d/dt ||u||^2 + 1/2 ||grad u||^2 <= C G^2 ||n||^2_{6/5}; with G = 0 the
/// check is that the kinetic energy does not increase. The report carries the
/// fitted C in `constant`, sup ||u||^2 in `lhs` and int ||grad u||^2 dt in `rhs`.
InequalityReport check_velocity_energy(const std::vector<DiagnosticsRow>& rows, double gravity,
                                       double slack_rel = 1e-6);

struct ConvergenceVerdict {
    bool passed = false;
    bool c_max_monotone = true;
    bool tail_monotone = true;
    double conv_n_ratio = 0; ///< final / initial
    double c_max_ratio = 0;
    double u_sup_ratio = 0;
    std::string reason;
};

/// Final sup norms below rel_threshold times their initial values (or below
/// abs_floor), c_max non-increasing throughout, and each series
/// non-increasing over the last half of the rows. Tail increments up to
/// abs_floor are rounding and ignored.
ConvergenceVerdict convergence_monitor(const std::vector<DiagnosticsRow>& rows, double rel_threshold = 1e-2,
                                       double abs_floor = 1e-10, double c_tol = 1e-12);

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRow>& rows);
void write_inequality_csv(std::ostream& os, const std::vector<InequalityReport>& reports);

} // namespace chemofluid
