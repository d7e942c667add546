// Preconditioned conjugate gradients for the symmetric positive
// (semi-)definite systems of the time stepper.
//
// Singular systems (the pure-Neumann pressure Poisson problem) are handled by
// passing a component label per unknown: the right-hand side must have zero
// sum on every component, and iterates are kept mean-zero per component so
// the returned solution is the mean-zero one.

#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <memory>
#include <span>
#include <vector>

namespace chemofluid {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// `cholesky` is a sparse Cholesky factorisation (AMD ordering) of the
/// matrix the solver was built with; for a singular operator one unknown per
/// component is pinned, which makes it exact on compatible residuals.
enum class Preconditioner { none, jacobi, incomplete_cholesky, cholesky };

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0;
};

class SpdSolver {
public:
    /// `components` (optional) marks the null-space blocks of a singular
    /// operator; pass an empty span for a definite system.
    SpdSolver(SparseMatrix a, Preconditioner precond, std::vector<int> components = {});

    /// Solve A x = b to relative residual <= tol starting from x. Throws
    /// SolverAbort when max_iterations is exceeded or, in the singular case,
    /// when b is incompatible beyond 1e-10 relative.
    SolveStats solve(std::span<const double> b, std::span<double> x, double tol, int max_iterations) const;

    /// Replace the operator and keep the current preconditioner. The new
    /// matrix must have the same size; the preconditioner stays good while the
    /// two operators are spectrally close.
    void set_matrix(SparseMatrix a);

    std::size_t size() const { return static_cast<std::size_t>(a_.rows()); }
    const SparseMatrix& matrix() const { return a_; }

private:
    void apply_preconditioner(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;
    void project(Eigen::VectorXd& v) const;

    SparseMatrix a_;
    Preconditioner precond_;
    std::vector<int> components_;
    int n_components_ = 0;
    Eigen::VectorXd inv_diag_;
    std::unique_ptr<Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::NaturalOrdering<int>>> ichol_;
    std::unique_ptr<Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>> chol_;
    std::vector<Eigen::Index> pinned_;
};

/// One-shot convenience wrapper.
SolveStats solve_spd(const SparseMatrix& a, std::span<const double> b, std::span<double> x, double tol,
                     int max_iterations, Preconditioner precond = Preconditioner::jacobi,
                     std::vector<int> components = {});

} // namespace chemofluid
