#include "stokeswave/nsnd.hpp"

#include <cmath>

#include "stokeswave/capgrav.hpp"
#include "stokeswave/util.hpp"

namespace stokeswave {

PsiOperator::PsiOperator(std::shared_ptr<const FlatteningGeometry> geometry, double gamma,
                         SolveMethod method)
    : geometry_(std::move(geometry)), gamma_(gamma), method_(method) {}

const StokesSolver& PsiOperator::stress_solver() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (!stress_)
        stress_ = std::make_unique<StokesSolver>(geometry_, gamma_, StokesSolver::BCKind::Stress,
                                                 method_);
    return *stress_;
}

const StokesSolver& PsiOperator::navier_solver() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (!navier_)
        navier_ = std::make_unique<StokesSolver>(geometry_, gamma_, StokesSolver::BCKind::Navier,
                                                 method_);
    return *navier_;
}

SurfaceField psi_apply(const PsiOperator& op, const SurfaceField& chi) {
    StokesProblem prob;
    prob.geometry = op.geometry_ptr();
    prob.gamma = op.gamma();
    StressBC bc;
    bc.kx = multiply(op.geometry().normal_x, chi);
    bc.kz = chi;
    prob.bc = bc;
    StokesSolution sol = op.stress_solver().solve(prob, ResidualPolicy::Cheap);
    SurfaceField trace = normal_trace(op.geometry(), sol);
    op.last_trace_mean_ = trace.mean();
    return project_mean_zero(trace);
}

SurfaceField psi_inverse_apply(const PsiOperator& op, const SurfaceField& h) {
    if (std::abs(h.mean()) > 1e-10 * std::max(1.0, h.max_abs()))
        throw NonZeroMean("psi_inverse_apply: int h = " +
                          std::to_string(2.0 * M_PI * h.mean()));
    StokesProblem prob;
    prob.geometry = op.geometry_ptr();
    prob.gamma = op.gamma();
    NavierBC bc;
    bc.lx = SurfaceField(op.geometry().grid);
    bc.lz = SurfaceField(op.geometry().grid);
    bc.h = h;
    prob.bc = bc;
    StokesSolution sol = op.navier_solver().solve(prob, ResidualPolicy::Cheap);
    return project_mean_zero(normal_stress_trace(op.geometry(), sol));
}

Eigen::MatrixXd psi_matrix(const PsiOperator& op, int modes, int nthreads) {
    const GridSpec& grid = op.geometry().grid;
    if (modes > grid.Nx - 2) throw ConfigError("psi_matrix: modes must be <= Nx-2");
    op.stress_solver();  // force the shared factorization before the parallel loop
    Eigen::MatrixXd M(modes, modes);
    parallel_for(modes, nthreads, [&](int j) {
        // basis index j -> real basis function j+1 (skip the constant)
        SurfaceField e = real_basis_field(grid, j + 1);
        SurfaceField col = psi_apply(op, e);
        Eigen::VectorXd c = real_basis_coords(col);
        M.col(j) = c.segment(1, modes);
    });
    return M;
}

double coercivity_constant(const Eigen::MatrixXd& psi, const GridSpec& grid) {
    (void)grid;
    const int m = static_cast<int>(psi.rows());
    Eigen::MatrixXd S = -0.5 * (psi + psi.transpose());
    // H^{-1/2} Gram of the mean-zero basis [cos x, sin x, cos 2x, ...]:
    // diag(pi (1+k^2)^{-1/2}); the common factor pi cancels against the
    // L^2 pairing weight of <Psi e_j, e_k>.
    Eigen::VectorXd w(m);
    for (int j = 0; j < m; ++j) {
        int k = (j + 2) / 2;
        w[j] = std::pow(1.0 + double(k) * k, -0.5);
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::MatrixXd(w.asDiagonal()));
    return es.eigenvalues().minCoeff();
}

double commutator_defect(const PsiOperator& op, const SurfaceField& chi, int alpha) {
    SurfaceField a = psi_apply(op, deriv_x(chi, alpha));
    SurfaceField b = deriv_x(psi_apply(op, chi), alpha);
    double num = sobolev_norm(a - b, 1.5);
    double den = sobolev_norm(chi, alpha - 0.5);
    return num / std::max(den, 1e-300);
}

double commutator_defect_eta_normalized(const PsiOperator& op, const SurfaceField& chi,
                                        int alpha) {
    double d = commutator_defect(op, chi, alpha);
    return d / sobolev_norm(op.geometry().eta, 3.5);
}

SurfaceField phi_apply(const PsiOperator& op, const SurfaceField& chi, double tol,
                       PicardReport* report) {
    StokesSolution sol = solve_navier_stokes_stress(op.geometry_ptr(), op.gamma(), chi, tol,
                                                    report, &op.stress_solver());
    return project_mean_zero(normal_trace(op.geometry(), sol));
}

SurfaceField xi_apply(const PsiOperator& op, const SurfaceField& h, double tol,
                      PicardReport* report) {
    StokesSolution sol = solve_navier_stokes_dirichlet(op.geometry_ptr(), op.gamma(), h, tol,
                                                       report, &op.navier_solver());
    return normal_stress_trace(op.geometry(), sol);
}

SurfaceField phi_inverse_apply(const PsiOperator& op, const SurfaceField& h, double tol,
                               PicardReport* report) {
    return project_mean_zero(xi_apply(op, h, tol, report));
}

}  // namespace stokeswave
