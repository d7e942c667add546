#include "chemofluid/linear_solver.hpp"

#include "chemofluid/errors.hpp"

#include <cmath>
#include <sstream>

namespace chemofluid {

SpdSolver::SpdSolver(SparseMatrix a, Preconditioner precond, std::vector<int> components)
    : a_(std::move(a)), precond_(precond), components_(std::move(components)) {
    a_.makeCompressed();
    if (!components_.empty()) {
        if (components_.size() != size()) throw std::invalid_argument("SpdSolver: component labels size mismatch");
        for (int c : components_) n_components_ = std::max(n_components_, c + 1);
    }
    if (precond_ == Preconditioner::jacobi) {
        inv_diag_ = a_.diagonal();
        for (Eigen::Index k = 0; k < inv_diag_.size(); ++k) {
            inv_diag_[k] = inv_diag_[k] != 0 ? 1.0 / inv_diag_[k] : 1.0;
        }
    } else if (precond_ == Preconditioner::incomplete_cholesky) {
        ichol_ = std::make_unique<Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::NaturalOrdering<int>>>();
        ichol_->compute(a_);
        if (ichol_->info() != Eigen::Success) {
            throw SolverAbort("incomplete Cholesky factorisation failed");
        }
    } else if (precond_ == Preconditioner::cholesky) {
        SparseMatrix m = a_;
        if (!components_.empty()) {
            std::vector<char> seen(n_components_, 0);
            std::vector<char> pin(size(), 0);
            for (std::size_t k = 0; k < size(); ++k) {
                if (!seen[components_[k]]) {
                    seen[components_[k]] = 1;
                    pin[k] = 1;
                    pinned_.push_back(static_cast<Eigen::Index>(k));
                }
            }
            m.prune([&](Eigen::Index i, Eigen::Index j, double) { return !pin[i] && !pin[j]; });
            for (Eigen::Index k : pinned_) m.coeffRef(k, k) = 1.0;
            m.makeCompressed();
        }
        chol_ = std::make_unique<Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>>();
        chol_->compute(m);
        if (chol_->info() != Eigen::Success) throw SolverAbort("sparse Cholesky factorisation failed");
    }
}

void SpdSolver::set_matrix(SparseMatrix a) {
    if (a.rows() != a_.rows() || a.cols() != a_.cols()) throw std::invalid_argument("SpdSolver: size mismatch");
    a_ = std::move(a);
    a_.makeCompressed();
}

void SpdSolver::project(Eigen::VectorXd& v) const {
    if (components_.empty()) return;
    std::vector<double> sum(n_components_, 0.0);
    std::vector<double> count(n_components_, 0.0);
    for (std::size_t k = 0; k < components_.size(); ++k) {
        sum[components_[k]] += v[k];
        count[components_[k]] += 1.0;
    }
    for (std::size_t k = 0; k < components_.size(); ++k) v[k] -= sum[components_[k]] / count[components_[k]];
}

void SpdSolver::apply_preconditioner(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
    switch (precond_) {
    case Preconditioner::none:
        z = r;
        break;
    case Preconditioner::jacobi:
        z = r.cwiseProduct(inv_diag_);
        break;
    case Preconditioner::incomplete_cholesky:
        z = ichol_->solve(r);
        break;
    case Preconditioner::cholesky:
        if (pinned_.empty()) {
            z = chol_->solve(r);
        } else {
            Eigen::VectorXd rr = r;
            for (Eigen::Index k : pinned_) rr[k] = 0.0;
            z = chol_->solve(rr);
        }
        break;
    }
    project(z);
}

SolveStats SpdSolver::solve(std::span<const double> b_in, std::span<double> x_out, double tol,
                            int max_iterations) const {
    const auto n = static_cast<Eigen::Index>(size());
    if (b_in.size() != size() || x_out.size() != size()) throw std::invalid_argument("SpdSolver: size mismatch");
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(b_in.data(), n);
    Eigen::Map<Eigen::VectorXd> x(x_out.data(), n);

    if (!components_.empty()) {
        std::vector<double> sum(n_components_, 0.0);
        std::vector<double> mag(n_components_, 0.0);
        for (Eigen::Index k = 0; k < n; ++k) {
            sum[components_[k]] += b[k];
            mag[components_[k]] += std::abs(b[k]);
        }
        for (int c = 0; c < n_components_; ++c) {
            if (std::abs(sum[c]) > 1e-10 * mag[c] && mag[c] > 0) {
                std::ostringstream m;
                m << "incompatible right-hand side for singular system (component " << c << ", relative mean "
                  << std::abs(sum[c]) / mag[c] << ")";
                throw SolverAbort(m.str());
            }
        }
        project(b);
        Eigen::VectorXd xv = x;
        project(xv);
        x = xv;
    }

    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero();
        return {0, 0.0};
    }

    Eigen::VectorXd r = b - a_ * x;
    Eigen::VectorXd z(n), p(n), ap(n);
    SolveStats stats;
    int it = 0;
    // Outer loop restarts from the true residual when the recurrence claims
    // convergence; it guards against residual drift at tight tolerances.
    while (true) {
        double rnorm = r.norm();
        if (rnorm <= tol * bnorm) {
            stats.relative_residual = rnorm / bnorm;
            break;
        }
        apply_preconditioner(r, z);
        p = z;
        double rz = r.dot(z);
        bool restarted = false;
        while (it < max_iterations) {
            ap.noalias() = a_ * p;
            const double pap = p.dot(ap);
            if (!(pap > 0)) break;
            const double alpha = rz / pap;
            x += alpha * p;
            r -= alpha * ap;
            ++it;
            if (r.norm() <= tol * bnorm) {
                restarted = true;
                break;
            }
            apply_preconditioner(r, z);
            const double rz_new = r.dot(z);
            p = z + (rz_new / rz) * p;
            rz = rz_new;
        }
        Eigen::VectorXd xv = x;
        project(xv);
        x = xv;
        r = b - a_ * x;
        if (!restarted) {
            rnorm = r.norm();
            stats.relative_residual = rnorm / bnorm;
            if (rnorm <= tol * bnorm) break;
            std::ostringstream m;
            m << "conjugate gradients did not converge in " << max_iterations << " iterations (relative residual "
              << rnorm / bnorm << ", tolerance " << tol << ")";
            throw SolverAbort(m.str());
        }
        if (it >= max_iterations && r.norm() > tol * bnorm) {
            std::ostringstream m;
            m << "conjugate gradients did not converge in " << max_iterations << " iterations";
            throw SolverAbort(m.str());
        }
    }
    stats.iterations = it;
    return stats;
}

SolveStats solve_spd(const SparseMatrix& a, std::span<const double> b, std::span<double> x, double tol,
                     int max_iterations, Preconditioner precond, std::vector<int> components) {
    SpdSolver solver(a, precond, std::move(components));
    return solver.solve(b, x, tol, max_iterations);
}

} // namespace chemofluid
