#pragma once

// The capillary-gravity operator g I + sigma H, its damped-Newton inversion
// producing the steady surface eta*, the linearization T_eta (divergence-form
// elliptic operator with coefficients a_ij), and the quadratic remainder
// R_eta(f) = (sigma H + g I)(eta+f) - (sigma H + g I)(eta) - T_eta f.

#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "stokeswave/geometry.hpp"
#include "stokeswave/spectral.hpp"

namespace stokeswave {

struct CapGravParams {
    double g = 1.0;      // gravity
    double sigma = 1.0;  // surface tension
    double b = 1.0;      // depth

    void validate() const {
        if (!(g > 0.0 && sigma > 0.0 && b > 0.0))
            throw ConfigError("CapGravParams: g, sigma, b must be positive");
    }
};

// Linearization of the capillary-gravity operator at eta:
//   T_eta f = g f - sigma d_x(a f'),  a = (1 + eta'^2)^{-3/2}  (d = 1).
class TEtaOperator {
  public:
    TEtaOperator(const SurfaceField& eta, const CapGravParams& params);

    const SurfaceField& eta() const { return eta_; }
    const CapGravParams& params() const { return params_; }
    // Coefficient a = a_11 as a dealiased spectral field.
    const SurfaceField& coefficient() const { return a_; }

    SurfaceField apply(const SurfaceField& f) const;
    // Dense solve over the resolved Fourier modes (|k| <= Nx/2 - 1).
    SurfaceField solve(const SurfaceField& F, double tol = 1e-11) const;

    // Pointwise ellipticity interval of a on the collocation grid,
    // checked at construction against (1+|eta'|^2)^{-3/2} / ^{-1/2}.
    double coeff_min() const { return a_min_; }
    double coeff_max() const { return a_max_; }

  private:
    const Eigen::PartialPivLU<Eigen::MatrixXd>& lu() const;
    SurfaceField eta_;
    CapGravParams params_;
    SurfaceField a_;
    double a_min_ = 0.0, a_max_ = 0.0;
    mutable std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
    mutable std::mutex mu_;
};

SurfaceField capgrav_apply(const SurfaceField& eta, const CapGravParams& params);

struct NewtonTrace {
    std::vector<double> residuals;
    int iterations = 0;
    bool converged = false;
};

// Solves g eta + sigma H(eta) = -phi by damped Newton from eta0 = -phi/g.
// Residuals are measured in the H^{3/2} norm (= H^{s-1/2} at the d = 1
// regularity floor s = 2). Requires min(-phi) > -g b; the returned surface
// satisfies min(eta* + b) > 0 (verified on an oversampled grid).
SurfaceField capgrav_solve(const SurfaceField& phi, const CapGravParams& params,
                           double tol = 1e-11, NewtonTrace* trace = nullptr);

SurfaceField r_eta(const SurfaceField& eta, const SurfaceField& f, const CapGravParams& params);

// Real Fourier basis over the full span: [1, cos x, sin x, ..., cos Kx, sin Kx],
// K = Nx/2 - 1. Shared by the dense materializations here and in nsnd.
int real_basis_size(const GridSpec& grid);
SurfaceField real_basis_field(const GridSpec& grid, int j);
Eigen::VectorXd real_basis_coords(const SurfaceField& u);
SurfaceField from_real_basis_coords(const GridSpec& grid, const Eigen::VectorXd& c);

}  // namespace stokeswave
