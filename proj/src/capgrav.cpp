#include "stokeswave/capgrav.hpp"

#include <cmath>

#include "stokeswave/util.hpp"

namespace stokeswave {

int real_basis_size(const GridSpec& grid) { return grid.Nx - 1; }

SurfaceField real_basis_field(const GridSpec& grid, int j) {
    if (j == 0) return SurfaceField::constant(grid, 1.0);
    int k = (j + 1) / 2;
    return (j % 2 == 1) ? SurfaceField::cosine(grid, k, 1.0) : SurfaceField::sine(grid, k, 1.0);
}

Eigen::VectorXd real_basis_coords(const SurfaceField& u) {
    const int nb = real_basis_size(u.grid());
    Eigen::VectorXd c(nb);
    c[0] = u.coeff(0).real();
    for (int k = 1; 2 * k - 1 < nb; ++k) {
        c[2 * k - 1] = 2.0 * u.coeff(k).real();
        if (2 * k < nb) c[2 * k] = -2.0 * u.coeff(k).imag();
    }
    return c;
}

SurfaceField from_real_basis_coords(const GridSpec& grid, const Eigen::VectorXd& c) {
    SurfaceField u(grid);
    u.set_coeff(0, Complex(c[0], 0));
    for (int k = 1; 2 * k - 1 < c.size(); ++k) {
        double a = c[2 * k - 1];
        double b = (2 * k < c.size()) ? c[2 * k] : 0.0;
        u.set_coeff(k, Complex(a / 2, -b / 2));
        u.set_coeff(-k, Complex(a / 2, b / 2));
    }
    return u;
}

TEtaOperator::TEtaOperator(const SurfaceField& eta, const CapGravParams& params)
    : eta_(eta), params_(params) {
    params.validate();
    a_ = apply_pointwise(deriv_x(eta), [](double p) { return std::pow(1.0 + p * p, -1.5); });
    // Ellipticity interval (exact identity in d = 1: lower bound attained).
    Eigen::VectorXd pv = deriv_x(eta).values();
    Eigen::VectorXd av = a_.values();
    a_min_ = av.minCoeff();
    a_max_ = av.maxCoeff();
    double lower = std::pow(1.0 + pv.cwiseAbs2().maxCoeff(), -1.5);
    double upper = std::pow(1.0 + pv.cwiseAbs2().minCoeff(), -0.5);
    if (a_min_ < lower - 1e-9 || a_max_ > upper + 1e-9)
        log_warn("TEtaOperator: coefficient outside ellipticity interval (under-resolved eta?)");
}

SurfaceField TEtaOperator::apply(const SurfaceField& f) const {
    SurfaceField flux = multiply(a_, deriv_x(f));
    SurfaceField out = params_.g * f;
    out -= params_.sigma * deriv_x(flux);
    return out;
}

const Eigen::PartialPivLU<Eigen::MatrixXd>& TEtaOperator::lu() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (!lu_) {
        const int nb = real_basis_size(eta_.grid());
        Eigen::MatrixXd M(nb, nb);
        for (int j = 0; j < nb; ++j)
            M.col(j) = real_basis_coords(apply(real_basis_field(eta_.grid(), j)));
        lu_.emplace(M);
    }
    return *lu_;
}

SurfaceField TEtaOperator::solve(const SurfaceField& F, double tol) const {
    Eigen::VectorXd rhs = real_basis_coords(F);
    Eigen::VectorXd sol = lu().solve(rhs);
    SurfaceField f = from_real_basis_coords(eta_.grid(), sol);
    double scale = std::max(sobolev_norm(F, 0.0), 1e-300);
    double res = sobolev_norm(apply(f) - F, 0.0) / scale;
    if (res > std::max(tol, 1e-8))
        throw SingularSystem("t_eta_solve: residual " + std::to_string(res) +
                             " (ellipticity violated?)");
    return f;
}

SurfaceField capgrav_apply(const SurfaceField& eta, const CapGravParams& params) {
    params.validate();
    SurfaceField out = params.g * eta;
    out += params.sigma * mean_curvature(eta);
    return out;
}

SurfaceField capgrav_solve(const SurfaceField& phi, const CapGravParams& params, double tol,
                           NewtonTrace* trace) {
    params.validate();
    double min_minus_phi = min_oversampled(-1.0 * phi, 4);
    if (!(min_minus_phi > -params.g * params.b))
        throw DepthPreconditionViolated("capgrav_solve: min(-phi) = " +
                                        std::to_string(min_minus_phi) + " <= -g b = " +
                                        std::to_string(-params.g * params.b));

    auto residual = [&](const SurfaceField& eta) {
        SurfaceField r = capgrav_apply(eta, params);
        r += phi;
        return r;
    };

    SurfaceField eta = (-1.0 / params.g) * phi;
    SurfaceField res = residual(eta);
    double rnorm = sobolev_norm(res, 1.5);
    NewtonTrace tr;
    tr.residuals.push_back(rnorm);

    const int max_iter = 30;
    for (int it = 0; it < max_iter && rnorm >= tol; ++it) {
        TEtaOperator T(eta, params);
        SurfaceField step = T.solve(res);
        double alpha = 1.0;
        SurfaceField eta_next = eta;
        SurfaceField res_next = res;
        double rnext = rnorm;
        bool improved = false;
        for (int halving = 0; halving <= 10; ++halving) {
            eta_next = eta - alpha * step;
            res_next = residual(eta_next);
            rnext = sobolev_norm(res_next, 1.5);
            if (rnext < rnorm) {
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved)
            throw NewtonDiverged("capgrav_solve: no residual reduction at iteration " +
                                 std::to_string(it) + " (residual " + std::to_string(rnorm) + ")");
        eta = eta_next;
        res = res_next;
        rnorm = rnext;
        tr.residuals.push_back(rnorm);
        tr.iterations = it + 1;
    }
    if (rnorm >= tol)
        throw NewtonDiverged("capgrav_solve: residual " + std::to_string(rnorm) + " after " +
                             std::to_string(max_iter) + " iterations");
    tr.converged = true;
    if (trace) *trace = tr;

    // The minimum principle guarantees this in the continuum; verify the
    // discrete surface anyway.
    double depth = min_oversampled(eta, 4) + params.b;
    if (depth <= 0.0)
        throw DepthViolation("capgrav_solve: returned surface has min(eta*+b) = " +
                             std::to_string(depth));
    return eta;
}

SurfaceField r_eta(const SurfaceField& eta, const SurfaceField& f, const CapGravParams& params) {
    TEtaOperator T(eta, params);
    SurfaceField out = capgrav_apply(eta + f, params);
    out -= capgrav_apply(eta, params);
    out -= T.apply(f);
    return out;
}

}  // namespace stokeswave
