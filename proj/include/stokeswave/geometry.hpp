#pragma once

// Flattening diffeomorphism F_eta(x,z) = (x, rho(x,z)) from the reference
// strip T^1 x (-b,0) onto the fluid domain, with
//     rho(x,z) = ((b+z)/b) e^{delta z |D|} eta(x) + z,
// plus the derived coefficient fields used by the flattened Stokes systems:
//     J = d_z rho,   A = (grad F_eta)^{-1},   B = sum_k A_{(d+1)k}^2.

#include "stokeswave/spectral.hpp"

namespace stokeswave {

struct FlatteningGeometry {
    GridSpec grid;
    SurfaceField eta;
    double delta = 0.0;           // smoothing parameter, chosen at build time
    VolumeField rho;              // rho(x,z)
    VolumeField J;                // Jacobian d_z rho
    VolumeField A;                // 4 blocks: A11, A12, A21, A22 (row-major)
    VolumeField B;                // A21^2 + A22^2
    SurfaceField normal_x;        // N = (-eta', 1)
    double jac_lower_bound = 0.0; // min J on a 2x-oversampled grid
    double min_depth = 0.0;       // min(eta + b), oversampled

    const Eigen::MatrixXd& A11() const { return A.block(0); }
    const Eigen::MatrixXd& A12() const { return A.block(1); }
    const Eigen::MatrixXd& A21() const { return A.block(2); }
    const Eigen::MatrixXd& A22() const { return A.block(3); }

    // eta' values at the surface collocation points.
    Eigen::VectorXd etap_values() const { return deriv_x(eta).values(); }

    bool is_flat(double tol = 1e-14) const;
};

// Builds the geometry for eta. delta starts from the constructive estimate
// c0 / (2 b (1 + || |D| eta ||_{l1})) and is halved (up to 8 times) until the
// oversampled min J clears the margin.
// Throws DepthViolation if min(eta+b) <= 0, JacobianDegenerate if no
// admissible delta is found.
FlatteningGeometry build_geometry(const SurfaceField& eta, const GridSpec& grid);

// Mean curvature H(eta) = -div(eta' / sqrt(1+eta'^2)); d = 1 fast path
// -eta'' (1+eta'^2)^{-3/2}, dealiased. Output has exactly zero mean.
SurfaceField mean_curvature(const SurfaceField& eta);

// General-d divergence form of the curvature (cross-check route).
SurfaceField mean_curvature_divform(const SurfaceField& eta);

// rho, J evaluated pointwise from eta on an arbitrary (finer) grid; used for
// oversampled verification.
VolumeField rho_on_grid(const SurfaceField& eta, double delta, const GridSpec& grid);
VolumeField jacobian_on_grid(const SurfaceField& eta, double delta, const GridSpec& grid);

}  // namespace stokeswave
