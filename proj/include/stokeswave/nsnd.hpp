#pragma once

// Normal-stress -> normal-Dirichlet operators. Psi_gamma[eta] maps a scalar
// stress amplitude chi (stress chi N on the surface) to the normal trace
// v.N of the resulting gamma-Stokes velocity; its inverse is realized by the
// Navier-BC solve (the surjectivity construction), not by inverting a
// materialized matrix. Phi/Xi are the Navier-Stokes counterparts, defined
// for small data through the Picard iteration.

#include <atomic>
#include <memory>
#include <mutex>

#include <Eigen/Dense>

#include "stokeswave/stokes.hpp"

namespace stokeswave {

class PsiOperator {
  public:
    PsiOperator(std::shared_ptr<const FlatteningGeometry> geometry, double gamma,
                SolveMethod method = SolveMethod::Dense);

    const FlatteningGeometry& geometry() const { return *geometry_; }
    std::shared_ptr<const FlatteningGeometry> geometry_ptr() const { return geometry_; }
    double gamma() const { return gamma_; }

    // Diagnostics of the last application (mean of the raw trace before the
    // mean-zero projection).
    double last_trace_mean() const { return last_trace_mean_; }

    const StokesSolver& stress_solver() const;
    const StokesSolver& navier_solver() const;

  private:
    std::shared_ptr<const FlatteningGeometry> geometry_;
    double gamma_;
    SolveMethod method_;
    mutable std::mutex mu_;
    mutable std::unique_ptr<StokesSolver> stress_;
    mutable std::unique_ptr<StokesSolver> navier_;
    mutable std::atomic<double> last_trace_mean_{0.0};

    friend SurfaceField psi_apply(const PsiOperator&, const SurfaceField&);
};

// Psi_gamma[eta] chi = v|_{Sigma} . N, mean-zero.
SurfaceField psi_apply(const PsiOperator& op, const SurfaceField& chi);

// chi = Psi^{-1} h via the Navier solve; requires int h = 0.
SurfaceField psi_inverse_apply(const PsiOperator& op, const SurfaceField& h);

// Column j = psi_apply of the j-th mean-zero real Fourier basis function
// [cos x, sin x, cos 2x, ...], expanded in the same basis. modes <= Nx-2.
Eigen::MatrixXd psi_matrix(const PsiOperator& op, int modes, int nthreads = 1);

// Smallest eigenvalue of -sym(P) against the H^{-1/2} Gram on the
// materialized span: the discrete coercivity constant c_Psi.
double coercivity_constant(const Eigen::MatrixXd& psi, const GridSpec& grid);

// || [Psi, d^alpha] chi ||_{H^{3/2}} / ||chi||_{H^{alpha - 1/2}} (the
// commutator-gain defect; sigma = 3/2 as the stability proof uses it).
double commutator_defect(const PsiOperator& op, const SurfaceField& chi, int alpha);
// Same defect additionally divided by ||eta||_{H^{s+3/2}} (s = 2), the
// constant-boundedness form of the commutator estimate; NaN for eta = 0.
double commutator_defect_eta_normalized(const PsiOperator& op, const SurfaceField& chi, int alpha);

// Nonlinear (Navier-Stokes) counterparts.
SurfaceField phi_apply(const PsiOperator& op, const SurfaceField& chi, double tol,
                       PicardReport* report = nullptr);
SurfaceField xi_apply(const PsiOperator& op, const SurfaceField& h, double tol,
                      PicardReport* report = nullptr);
// Phi^{-1} h = Xi(h) - mean(Xi(h)).
SurfaceField phi_inverse_apply(const PsiOperator& op, const SurfaceField& h, double tol,
                               PicardReport* report = nullptr);

}  // namespace stokeswave
