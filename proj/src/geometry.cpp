#include "stokeswave/geometry.hpp"

#include <cmath>

#include "stokeswave/util.hpp"

namespace stokeswave {

namespace {

// Evaluates sum_k m(|k|, z) eta_hat(k) e^{ikx} on the grid's collocation
// points, one inverse FFT per z level.
VolumeField multiplier_field(const SurfaceField& eta, const GridSpec& grid,
                             const std::function<Complex(int, double)>& mult) {
    VolumeField out(grid, 1);
    const Eigen::VectorXd z = grid.z_points();
    const int n = eta.grid().Nx;
    for (int iz = 0; iz < grid.Nz; ++iz) {
        std::vector<Complex> c(grid.Nx, Complex(0, 0));
        for (int i = 0; i < n; ++i) {
            int k = fft_wavenumber(i, n);
            if (2 * std::abs(k) >= std::min(n, grid.Nx)) continue;
            c[k >= 0 ? k : k + grid.Nx] = eta.raw()[i] * mult(k, z[iz]);
        }
        out.block(0).row(iz) = dft_inverse(c).transpose();
    }
    return out;
}

}  // namespace

bool FlatteningGeometry::is_flat(double tol) const {
    for (const auto& c : eta.raw())
        if (std::abs(c) > tol) return false;
    return true;
}

VolumeField rho_on_grid(const SurfaceField& eta, double delta, const GridSpec& grid) {
    const double b = grid.b;
    VolumeField rho = multiplier_field(eta, grid, [&](int k, double z) {
        return Complex(((b + z) / b) * std::exp(delta * z * std::abs(k)), 0.0);
    });
    const Eigen::VectorXd z = grid.z_points();
    for (int iz = 0; iz < grid.Nz; ++iz) rho.block(0).row(iz).array() += z[iz];
    return rho;
}

VolumeField jacobian_on_grid(const SurfaceField& eta, double delta, const GridSpec& grid) {
    const double b = grid.b;
    VolumeField J = multiplier_field(eta, grid, [&](int k, double z) {
        double e = std::exp(delta * z * std::abs(k));
        return Complex(e / b + ((b + z) / b) * delta * std::abs(k) * e, 0.0);
    });
    J.block(0).array() += 1.0;
    return J;
}

FlatteningGeometry build_geometry(const SurfaceField& eta, const GridSpec& grid) {
    grid.validate();
    FlatteningGeometry g;
    g.grid = grid;
    g.eta = eta;

    g.min_depth = min_oversampled(eta, 4) + grid.b;
    if (g.min_depth <= 0.0)
        throw DepthViolation("build_geometry: min(eta + b) = " + std::to_string(g.min_depth));

    // || |D| eta ||_{l1 of coeffs} drives the constructive delta estimate.
    double dl1 = 0.0;
    for (int i = 0; i < eta.size(); ++i)
        dl1 += std::abs(fft_wavenumber(i, eta.grid().Nx)) * std::abs(eta.raw()[i]);

    const double c0 = g.min_depth;
    const double margin = 0.25 * c0 / grid.b;
    double delta = c0 / (2.0 * grid.b * (1.0 + dl1));

    GridSpec fine = grid;
    fine.Nx *= 2;
    fine.Nz *= 2;
    double minJ = 0.0;
    bool ok = false;
    for (int attempt = 0; attempt <= 8; ++attempt) {
        minJ = jacobian_on_grid(eta, delta, fine).block(0).minCoeff();
        if (minJ >= margin) {
            ok = true;
            break;
        }
        delta *= 0.5;
    }
    if (!ok)
        throw JacobianDegenerate("build_geometry: min J = " + std::to_string(minJ) +
                                 " after delta search (delta = " + std::to_string(delta) + ")");
    g.delta = delta;
    g.jac_lower_bound = minJ;

    g.rho = rho_on_grid(eta, delta, grid);
    g.J = jacobian_on_grid(eta, delta, grid);

    // rho_x, pointwise exact from the coefficients of eta.
    const double b = grid.b;
    VolumeField rho_x = multiplier_field(eta, grid, [&](int k, double z) {
        return Complex(0.0, k) * (((b + z) / b) * std::exp(delta * z * std::abs(k)));
    });

    g.A = VolumeField(grid, 4);
    g.A.block(0).setOnes();
    g.A.block(1).setZero();
    g.A.block(2) = -rho_x.block(0).cwiseQuotient(g.J.block(0));
    g.A.block(3) = g.J.block(0).cwiseInverse();

    g.B = VolumeField(grid, 1);
    g.B.block(0) = g.A.block(2).cwiseAbs2() + g.A.block(3).cwiseAbs2();

    g.normal_x = -1.0 * deriv_x(eta);
    return g;
}

SurfaceField mean_curvature(const SurfaceField& eta) {
    // d = 1 fast path: H = -eta'' (1 + eta'^2)^{-3/2}, evaluated on a
    // 2x-padded grid and truncated.
    const GridSpec& grid = eta.grid();
    SurfaceField etap = deriv_x(eta);
    SurfaceField etapp = deriv_x(eta, 2);
    Eigen::VectorXd p = etap.values_oversampled(2);
    Eigen::VectorXd pp = etapp.values_oversampled(2);
    Eigen::VectorXd h(p.size());
    for (int i = 0; i < p.size(); ++i) h[i] = -pp[i] * std::pow(1.0 + p[i] * p[i], -1.5);
    std::vector<Complex> fine = dft_forward(h);
    SurfaceField out(grid);
    const int n = grid.Nx;
    for (int i = 0; i < n; ++i) {
        int k = fft_wavenumber(i, n);
        if (k == -n / 2) continue;
        out.raw()[i] = fine[k >= 0 ? k : k + 2 * n];
    }
    out.enforce_real();
    // the divergence structure makes the mean exactly zero; drop the
    // aliasing remnant the fast path leaves there
    out.raw()[0] = Complex(0, 0);
    return out;
}

SurfaceField mean_curvature_divform(const SurfaceField& eta) {
    SurfaceField etap = deriv_x(eta);
    Eigen::VectorXd p = etap.values_oversampled(2);
    Eigen::VectorXd w(p.size());
    for (int i = 0; i < p.size(); ++i) w[i] = p[i] / std::sqrt(1.0 + p[i] * p[i]);
    std::vector<Complex> fine = dft_forward(w);
    SurfaceField flux(eta.grid());
    const int n = eta.grid().Nx;
    for (int i = 0; i < n; ++i) {
        int k = fft_wavenumber(i, n);
        if (k == -n / 2) continue;
        flux.raw()[i] = fine[k >= 0 ? k : k + 2 * n];
    }
    flux.enforce_real();
    return -1.0 * deriv_x(flux);
}

}  // namespace stokeswave
