#pragma once

// Discrete flattened gamma-Stokes systems on the collocation grid, with
// (a) prescribed normal stress and (b) Navier normal-Dirichlet boundary
// conditions, plus the gamma-Navier-Stokes Picard iteration.
//
// Discretization (boundary-bordering collocation): all velocity components
// and the pressure live on the same Fourier x Chebyshev grid. Per x-column,
//   u rows:  tangential BC row at z=0, momentum-x at interior z, u=0 at z=-b
//   w rows:  normal BC row at z=0,     momentum-z at interior z, w=0 at z=-b
//   p rows:  divergence at z=0 and interior z, momentum-z at z=-b (tau row)
// The divergence row at the bottom is traded for the bottom momentum-z row:
// with the divergence collocated at every point the k=0 Fourier block is
// structurally singular (first-order equation for w over-determined, d_z p
// under-determined); the trade restores a square nonsingular block and the
// dropped row's defect is reported by the oversampled residuals.
//
// The Navier system determines p only up to a constant (the tangential
// stress row annihilates p I); it is closed by one quadrature row
// int p J dx dz = 0 bordered with a multiplier column on the v.N rows.
//
// Solvers: a cached dense LU per (geometry, gamma, bc-kind), and a
// matrix-free GMRES path preconditioned by the per-Fourier-mode blocks of
// the x-averaged-coefficient operator (falls back to the LU when it stalls).

#include <memory>
#include <variant>

#include <Eigen/Dense>

#include "stokeswave/geometry.hpp"
#include "stokeswave/spectral.hpp"

namespace stokeswave {

struct StressBC {
    SurfaceField kx, kz;  // prescribed stress vector (pI - Dv)N = k on z=0
};

struct NavierBC {
    SurfaceField lx, lz;  // tangential stress data, l.N = 0
    SurfaceField h;       // normal trace data, v.N = h
};

struct StokesProblem {
    std::shared_ptr<const FlatteningGeometry> geometry;
    double gamma = 0.0;
    VolumeField f;  // d+1 components; empty means zero
    VolumeField g;  // scalar; empty means zero
    std::variant<StressBC, NavierBC> bc;
};

struct StokesResiduals {
    double momentum = 0.0;    // oversampled strong-form momentum defect
    double divergence = 0.0;  // oversampled divergence defect (incl. bottom)
    double bc = 0.0;          // oversampled boundary-row defect
    double noslip = 0.0;      // max |v(.,-b)|
    double algebraic = 0.0;   // |Ax-b| / |b| on the native grid
    double data_scale = 1.0;
};

struct StokesSolution {
    VolumeField v;  // flattened-frame velocity, d+1 blocks
    VolumeField p;  // scalar
    StokesResiduals residuals;
    double energy_ratio = 0.0;   // (|v|_H1 + |p|_L2) / data norm, J-weighted
    double trace_mean = 0.0;     // int v.N dx before any projection
    int krylov_iterations = -1;  // -1: dense path
};

enum class SolveMethod {
    Dense,   // cached LU (default)
    Krylov,  // mean-coefficient preconditioned GMRES, dense fallback
};

enum class ResidualPolicy {
    Full,   // re-substitution on the 2x-oversampled grid (default)
    Cheap,  // native-grid algebraic residual only
};

// Discrete estimate of the Korn-Poincare constant behind the solvability
// heuristic gamma* = 1/(4 c*): smallest eigenvalue of |D u|^2 against the
// H^1 Gram on a coarse probe grid, divided by 4.
double estimate_gamma_star(const FlatteningGeometry& geometry);

// One assembled-and-factorized boundary-value solver, reusable across many
// right-hand sides (the fixed-point loops lean on this).
class StokesSolver {
  public:
    enum class BCKind { Stress, Navier };

    StokesSolver(std::shared_ptr<const FlatteningGeometry> geometry, double gamma, BCKind kind,
                 SolveMethod method = SolveMethod::Dense);
    ~StokesSolver();
    StokesSolver(StokesSolver&&) noexcept;

    StokesSolution solve(const StokesProblem& problem,
                         ResidualPolicy rp = ResidualPolicy::Full) const;

    const FlatteningGeometry& geometry() const;
    double gamma() const;
    BCKind kind() const;

    // The assembled collocation matrix and its matrix-free application
    // (exposed for operator-level verification).
    Eigen::MatrixXd dense_matrix() const;
    Eigen::VectorXd apply_operator(const Eigen::VectorXd& x) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

StokesSolution solve_stress(const StokesProblem& problem,
                            SolveMethod method = SolveMethod::Dense);
StokesSolution solve_navier(const StokesProblem& problem,
                            SolveMethod method = SolveMethod::Dense);

struct PicardReport {
    int iterations = 0;
    std::vector<double> contraction_ratios;
};

// gamma-Navier-Stokes with stress data chi N: fixed point of
// v -> solve_stress(f = -v.grad v). Throws NoContraction when the observed
// ratio stays >= 1 for three consecutive iterations.
StokesSolution solve_navier_stokes_stress(std::shared_ptr<const FlatteningGeometry> geometry,
                                          double gamma, const SurfaceField& chi, double tol,
                                          PicardReport* report = nullptr,
                                          const StokesSolver* cached_solver = nullptr);

// Same Picard loop for the Navier-BC data h (used by Xi).
StokesSolution solve_navier_stokes_dirichlet(std::shared_ptr<const FlatteningGeometry> geometry,
                                             double gamma, const SurfaceField& h, double tol,
                                             PicardReport* report = nullptr,
                                             const StokesSolver* cached_solver = nullptr);

// Boundary traces of a flattened solution.
SurfaceField normal_trace(const FlatteningGeometry& geometry, const StokesSolution& sol);
// chi = ((pI - Dv)N).N / |N|^2 at z = 0.
SurfaceField normal_stress_trace(const FlatteningGeometry& geometry, const StokesSolution& sol);

// Transported quadratic transport term f_i = -sum_j v_j D_j v_i.
VolumeField convective_forcing(const FlatteningGeometry& geometry, const VolumeField& v);

}  // namespace stokeswave
