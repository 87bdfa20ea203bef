#include "stokeswave/stokes.hpp"

#include <cmath>
#include <mutex>
#include <optional>

#include "stokeswave/chebyshev.hpp"
#include "stokeswave/util.hpp"

namespace stokeswave {

namespace {

using Eigen::ArrayXd;
using Eigen::ArrayXXd;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

enum Stencil { ST_ID = 0, ST_DX, ST_DZ, ST_DXX, ST_DXZ, ST_DZZ, ST_COUNT };
enum Var { VU = 0, VW = 1, VP = 2 };

// One operator term c(x,z) * stencil acting on one variable.
struct VTerm {
    int var;
    int st;
    ArrayXXd c;
};
// Surface-row term, coefficient over x at z = 0 (stencils ID/DX/DZ only).
struct STerm {
    int var;
    int st;
    ArrayXd c;
};

// x-derivative of a Nz-by-Nx value grid (Fourier, Nyquist zeroed).
MatrixXd ddx_grid(const MatrixXd& m) {
    const int nz = static_cast<int>(m.rows()), nx = static_cast<int>(m.cols());
    MatrixXd out(nz, nx);
    for (int iz = 0; iz < nz; ++iz) {
        std::vector<Complex> c = dft_forward(m.row(iz).transpose());
        for (int i = 0; i < nx; ++i) {
            int k = fft_wavenumber(i, nx);
            c[i] *= (k == -nx / 2) ? Complex(0, 0) : Complex(0, k);
        }
        out.row(iz) = dft_inverse(c).transpose();
    }
    return out;
}

// Bundle of pointwise coefficient fields entering the flattened operator.
struct CoeffBundle {
    GridSpec grid;
    ArrayXXd alpha, beta;            // A21, A22
    ArrayXXd cA, cB, cC, cD;         // alpha_x+a a_z, b b_z, b a_z, b_x+a b_z
    ArrayXXd J;
    ArrayXd etap;                    // eta' on the surface grid
    ArrayXd alpha0, beta0;           // alpha, beta at z = 0
    MatrixXd DZ;                     // d/dz collocation matrix (mapped)
    VectorXd wz;                     // z quadrature weights (mapped)
    double wx = 0.0;                 // x quadrature weight

    static CoeffBundle build(const SurfaceField& eta, double delta, const GridSpec& grid) {
        CoeffBundle cb;
        cb.grid = grid;
        MatrixXd Jm = jacobian_on_grid(eta, delta, grid).block(0);
        const double b = grid.b;
        // rho_x, pointwise exact from eta's coefficients
        VolumeField rx(grid, 1);
        const Eigen::VectorXd z = grid.z_points();
        const int n = eta.grid().Nx;
        for (int iz = 0; iz < grid.Nz; ++iz) {
            std::vector<Complex> c(grid.Nx, Complex(0, 0));
            for (int i = 0; i < n; ++i) {
                int k = fft_wavenumber(i, n);
                if (2 * std::abs(k) >= std::min(n, grid.Nx)) continue;
                double env = ((b + z[iz]) / b) * std::exp(delta * z[iz] * std::abs(k));
                c[k >= 0 ? k : k + grid.Nx] = eta.raw()[i] * Complex(0, k) * env;
            }
            rx.block(0).row(iz) = dft_inverse(c).transpose();
        }
        MatrixXd alpha = -rx.block(0).cwiseQuotient(Jm);
        MatrixXd beta = Jm.cwiseInverse();

        cb.DZ = (2.0 / b) * cheb::diff_matrix(grid.Nz);
        MatrixXd alpha_x = ddx_grid(alpha), alpha_z = cb.DZ * alpha;
        MatrixXd beta_x = ddx_grid(beta), beta_z = cb.DZ * beta;

        cb.alpha = alpha.array();
        cb.beta = beta.array();
        cb.J = Jm.array();
        cb.cA = alpha_x.array() + alpha.array() * alpha_z.array();
        cb.cB = beta.array() * beta_z.array();
        cb.cC = beta.array() * alpha_z.array();
        cb.cD = beta_x.array() + alpha.array() * beta_z.array();

        SurfaceField etap_f = deriv_x(eta);
        // surface values on this grid's x resolution
        std::vector<Complex> ec(grid.Nx, Complex(0, 0));
        for (int i = 0; i < n; ++i) {
            int k = fft_wavenumber(i, n);
            if (2 * std::abs(k) >= std::min(n, grid.Nx)) continue;
            ec[k >= 0 ? k : k + grid.Nx] = etap_f.raw()[i];
        }
        cb.etap = dft_inverse(ec).array();
        cb.alpha0 = cb.alpha.row(0).transpose();
        cb.beta0 = cb.beta.row(0).transpose();
        cb.wz = (b / 2.0) * cheb::clenshaw_curtis_weights(grid.Nz);
        cb.wx = grid.Lx / grid.Nx;
        return cb;
    }
};

struct TermTables {
    std::vector<VTerm> momx, momz, divt;
    std::vector<STerm> bc1, bc2;  // rows at z = 0
};

TermTables make_tables(const CoeffBundle& cb, double gamma, StokesSolver::BCKind kind) {
    const ArrayXXd one = ArrayXXd::Ones(cb.grid.Nz, cb.grid.Nx);
    TermTables t;
    // momentum-x: -gamma D1 u - [2 D1D1 + D2D2] u - D2D1 w + D1 p
    t.momx = {
        {VU, ST_DXX, -2.0 * one},
        {VU, ST_DXZ, -4.0 * cb.alpha},
        {VU, ST_DZZ, -(2.0 * cb.alpha.square() + cb.beta.square())},
        {VU, ST_DZ, -(2.0 * cb.cA + cb.cB + gamma * cb.alpha)},
        {VU, ST_DX, -gamma * one},
        {VW, ST_DXZ, -cb.beta},
        {VW, ST_DZZ, -cb.alpha * cb.beta},
        {VW, ST_DZ, -cb.cC},
        {VP, ST_DX, one},
        {VP, ST_DZ, cb.alpha},
    };
    // momentum-z: -gamma D1 w - D1D2 u - [D1D1 + 2 D2D2] w + D2 p
    t.momz = {
        {VU, ST_DXZ, -cb.beta},
        {VU, ST_DZZ, -cb.alpha * cb.beta},
        {VU, ST_DZ, -cb.cD},
        {VW, ST_DXX, -1.0 * one},
        {VW, ST_DXZ, -2.0 * cb.alpha},
        {VW, ST_DZZ, -(cb.alpha.square() + 2.0 * cb.beta.square())},
        {VW, ST_DZ, -(cb.cA + 2.0 * cb.cB + gamma * cb.alpha)},
        {VW, ST_DX, -gamma * one},
        {VP, ST_DZ, cb.beta},
    };
    t.divt = {
        {VU, ST_DX, one},
        {VU, ST_DZ, cb.alpha},
        {VW, ST_DZ, cb.beta},
    };

    const ArrayXd& ep = cb.etap;
    const ArrayXd& a0 = cb.alpha0;
    const ArrayXd& b0 = cb.beta0;
    const ArrayXd onex = ArrayXd::Ones(cb.grid.Nx);
    if (kind == StokesSolver::BCKind::Stress) {
        // x-component of (pI - Dv)N = k
        t.bc1 = {
            {VU, ST_DX, 2.0 * ep},
            {VU, ST_DZ, 2.0 * ep * a0 - b0},
            {VW, ST_DX, -onex},
            {VW, ST_DZ, -a0},
            {VP, ST_ID, -ep},
        };
        // z-component
        t.bc2 = {
            {VU, ST_DZ, ep * b0},
            {VW, ST_DX, ep},
            {VW, ST_DZ, ep * a0 - 2.0 * b0},
            {VP, ST_ID, onex},
        };
    } else {
        // tangential stress row tau.[(pI - Dv)N] = tau.l
        t.bc1 = {
            {VU, ST_DX, 2.0 * ep},
            {VU, ST_DZ, 2.0 * ep * a0 - (1.0 - ep.square()) * b0},
            {VW, ST_DX, -(1.0 - ep.square())},
            {VW, ST_DZ, -((1.0 - ep.square()) * a0 + 2.0 * ep * b0)},
        };
        // normal trace row v.N = h
        t.bc2 = {
            {VU, ST_ID, -ep},
            {VW, ST_ID, onex},
        };
    }
    return t;
}

// Derivative grids of one scalar unknown, indexed by stencil.
struct DerivGrids {
    MatrixXd g[ST_COUNT];
    static DerivGrids build(const MatrixXd& f, const MatrixXd& DZ) {
        DerivGrids d;
        d.g[ST_ID] = f;
        d.g[ST_DX] = ddx_grid(f);
        d.g[ST_DZ] = DZ * f;
        d.g[ST_DXX] = ddx_grid(d.g[ST_DX]);
        d.g[ST_DXZ] = DZ * d.g[ST_DX];
        d.g[ST_DZZ] = DZ * d.g[ST_DZ];
        return d;
    }
};

// Full-grid row values for a term list.
ArrayXXd eval_terms(const std::vector<VTerm>& terms, const DerivGrids dg[3]) {
    ArrayXXd acc = ArrayXXd::Zero(dg[0].g[0].rows(), dg[0].g[0].cols());
    for (const auto& t : terms) acc += t.c * dg[t.var].g[t.st].array();
    return acc;
}

ArrayXd eval_surface_terms(const std::vector<STerm>& terms, const DerivGrids dg[3]) {
    ArrayXd acc = ArrayXd::Zero(dg[0].g[0].cols());
    for (const auto& t : terms) acc += t.c * dg[t.var].g[t.st].row(0).transpose().array();
    return acc;
}

// ---------------------------------------------------------------- GMRES ---

struct GmresResult {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

GmresResult gmres(const std::function<VectorXd(const VectorXd&)>& applyA,
                  const std::function<VectorXd(const VectorXd&)>& applyM, const VectorXd& b,
                  VectorXd& x, double tol, int restart, int maxit) {
    GmresResult res;
    const auto n = b.size();
    x = VectorXd::Zero(n);
    VectorXd Mb = applyM(b);
    double bnorm = Mb.norm();
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    int total = 0;
    while (total < maxit) {
        VectorXd r = applyM(b - applyA(x));
        double beta = r.norm();
        if (beta / bnorm < tol) {
            res.converged = true;
            res.residual = beta / bnorm;
            return res;
        }
        int m = std::min(restart, maxit - total);
        std::vector<VectorXd> V(m + 1);
        MatrixXd H = MatrixXd::Zero(m + 1, m);
        VectorXd cs(m), sn(m), g = VectorXd::Zero(m + 1);
        V[0] = r / beta;
        g[0] = beta;
        int j = 0;
        for (; j < m; ++j) {
            VectorXd w = applyM(applyA(V[j]));
            for (int i = 0; i <= j; ++i) {
                H(i, j) = w.dot(V[i]);
                w -= H(i, j) * V[i];
            }
            H(j + 1, j) = w.norm();
            if (H(j + 1, j) > 0) V[j + 1] = w / H(j + 1, j);
            // Givens
            for (int i = 0; i < j; ++i) {
                double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
                H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
                H(i, j) = t;
            }
            double denom = std::hypot(H(j, j), H(j + 1, j));
            cs[j] = H(j, j) / denom;
            sn[j] = H(j + 1, j) / denom;
            H(j, j) = denom;
            H(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            ++total;
            if (std::abs(g[j + 1]) / bnorm < tol) {
                ++j;
                break;
            }
        }
        VectorXd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
        for (int i = 0; i < j; ++i) x += y[i] * V[i];
        res.iterations = total;
        res.residual = std::abs(g[j]) / bnorm;
        if (res.residual < tol) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

}  // namespace

// --------------------------------------------------------------- solver ---

struct StokesSolver::Impl {
    std::shared_ptr<const FlatteningGeometry> geom;
    double gamma;
    BCKind kind;
    SolveMethod method;

    CoeffBundle cb;
    TermTables tables;
    int N = 0;     // Nx*Nz
    int size = 0;  // 3N (+1 for the Navier border)

    mutable std::mutex mu;
    mutable std::optional<Eigen::PartialPivLU<MatrixXd>> lu;
    // per-mode preconditioner (built on demand for the Krylov path)
    mutable std::vector<Eigen::PartialPivLU<MatrixXcd>> mode_lu;
    mutable std::optional<Eigen::PartialPivLU<MatrixXd>> mode0_lu[2];

    int idx(int var, int iz, int ix) const { return var * N + iz + geom->grid.Nz * ix; }

    // ---- matrix-free application -----------------------------------------
    VectorXd apply(const VectorXd& x) const {
        const GridSpec& g = geom->grid;
        const int Nz = g.Nz, Nx = g.Nx;
        DerivGrids dg[3];
        for (int v = 0; v < 3; ++v) {
            Eigen::Map<const MatrixXd> f(x.data() + v * N, Nz, Nx);
            dg[v] = DerivGrids::build(f, cb.DZ);
        }
        ArrayXXd momx = eval_terms(tables.momx, dg);
        ArrayXXd momz = eval_terms(tables.momz, dg);
        ArrayXXd divv = eval_terms(tables.divt, dg);
        ArrayXd bc1 = eval_surface_terms(tables.bc1, dg);
        ArrayXd bc2 = eval_surface_terms(tables.bc2, dg);

        VectorXd y = VectorXd::Zero(size);
        for (int ix = 0; ix < Nx; ++ix) {
            y[idx(VU, 0, ix)] = bc1[ix];
            for (int iz = 1; iz < Nz - 1; ++iz) y[idx(VU, iz, ix)] = momx(iz, ix);
            y[idx(VU, Nz - 1, ix)] = dg[VU].g[ST_ID](Nz - 1, ix);
            y[idx(VW, 0, ix)] = bc2[ix];
            for (int iz = 1; iz < Nz - 1; ++iz) y[idx(VW, iz, ix)] = momz(iz, ix);
            y[idx(VW, Nz - 1, ix)] = dg[VW].g[ST_ID](Nz - 1, ix);
            for (int iz = 0; iz < Nz - 1; ++iz) y[idx(VP, iz, ix)] = divv(iz, ix);
            y[idx(VP, Nz - 1, ix)] = momz(Nz - 1, ix);  // tau row
        }
        if (kind == BCKind::Navier) {
            // border 1: pressure mean gauge; border 2: the spurious
            // Nyquist-in-x pressure mode (invisible to the discrete gradient)
            const double l1 = x[3 * N], l2 = x[3 * N + 1];
            double gauge1 = 0.0, gauge2 = 0.0;
            for (int ix = 0; ix < Nx; ++ix) {
                double sgn = (ix % 2 == 0) ? 1.0 : -1.0;
                for (int iz = 0; iz < Nz; ++iz) {
                    gauge1 += cb.wz[iz] * cb.wx * cb.J(iz, ix) * x[idx(VP, iz, ix)];
                    gauge2 += sgn * cb.wz[iz] * cb.wx * x[idx(VP, iz, ix)];
                }
                y[idx(VW, 0, ix)] += l1 + sgn * l2;
            }
            y[3 * N] = gauge1;
            y[3 * N + 1] = gauge2;
        }
        return y;
    }

    // ---- dense assembly ---------------------------------------------------
    void scatter_volume(MatrixXd& M, int row, int iz, int ix, const VTerm& t, const MatrixXd& DX,
                        const MatrixXd& DXX) const {
        const int Nz = geom->grid.Nz, Nx = geom->grid.Nx;
        const double c = t.c(iz, ix);
        switch (t.st) {
            case ST_ID:
                M(row, idx(t.var, iz, ix)) += c;
                break;
            case ST_DX:
                for (int jx = 0; jx < Nx; ++jx) M(row, idx(t.var, iz, jx)) += c * DX(ix, jx);
                break;
            case ST_DXX:
                for (int jx = 0; jx < Nx; ++jx) M(row, idx(t.var, iz, jx)) += c * DXX(ix, jx);
                break;
            case ST_DZ:
                for (int jz = 0; jz < Nz; ++jz) M(row, idx(t.var, jz, ix)) += c * cb.DZ(iz, jz);
                break;
            case ST_DZZ:
                for (int jz = 0; jz < Nz; ++jz) {
                    double v = 0.0;
                    for (int kz = 0; kz < Nz; ++kz) v += cb.DZ(iz, kz) * cb.DZ(kz, jz);
                    M(row, idx(t.var, jz, ix)) += c * v;
                }
                break;
            case ST_DXZ:
                for (int jx = 0; jx < Nx; ++jx) {
                    double s = c * DX(ix, jx);
                    if (s == 0.0) continue;
                    for (int jz = 0; jz < Nz; ++jz)
                        M(row, idx(t.var, jz, jx)) += s * cb.DZ(iz, jz);
                }
                break;
        }
    }

    MatrixXd assemble_dense() const {
        const GridSpec& g = geom->grid;
        const int Nz = g.Nz, Nx = g.Nx;
        // x differentiation matrices consistent with the FFT path
        // column j of DX = derivative of the j-th nodal basis function
        MatrixXd DX = ddx_grid(MatrixXd::Identity(Nx, Nx)).transpose();
        MatrixXd DXX = DX * DX;

        MatrixXd M = MatrixXd::Zero(size, size);
        for (int ix = 0; ix < Nx; ++ix) {
            for (int iz = 1; iz < Nz - 1; ++iz) {
                for (const auto& t : tables.momx) scatter_volume(M, idx(VU, iz, ix), iz, ix, t, DX, DXX);
                for (const auto& t : tables.momz) scatter_volume(M, idx(VW, iz, ix), iz, ix, t, DX, DXX);
            }
            for (int iz = 0; iz < Nz - 1; ++iz)
                for (const auto& t : tables.divt) scatter_volume(M, idx(VP, iz, ix), iz, ix, t, DX, DXX);
            for (const auto& t : tables.momz)
                scatter_volume(M, idx(VP, Nz - 1, ix), Nz - 1, ix, t, DX, DXX);  // tau row
            M(idx(VU, Nz - 1, ix), idx(VU, Nz - 1, ix)) = 1.0;
            M(idx(VW, Nz - 1, ix), idx(VW, Nz - 1, ix)) = 1.0;
            // surface rows
            for (const auto& t : tables.bc1) {
                int row = idx(VU, 0, ix);
                switch (t.st) {
                    case ST_ID:
                        M(row, idx(t.var, 0, ix)) += t.c[ix];
                        break;
                    case ST_DX:
                        for (int jx = 0; jx < Nx; ++jx)
                            M(row, idx(t.var, 0, jx)) += t.c[ix] * DX(ix, jx);
                        break;
                    case ST_DZ:
                        for (int jz = 0; jz < Nz; ++jz)
                            M(row, idx(t.var, jz, ix)) += t.c[ix] * cb.DZ(0, jz);
                        break;
                }
            }
            for (const auto& t : tables.bc2) {
                int row = idx(VW, 0, ix);
                switch (t.st) {
                    case ST_ID:
                        M(row, idx(t.var, 0, ix)) += t.c[ix];
                        break;
                    case ST_DX:
                        for (int jx = 0; jx < Nx; ++jx)
                            M(row, idx(t.var, 0, jx)) += t.c[ix] * DX(ix, jx);
                        break;
                    case ST_DZ:
                        for (int jz = 0; jz < Nz; ++jz)
                            M(row, idx(t.var, jz, ix)) += t.c[ix] * cb.DZ(0, jz);
                        break;
                }
            }
        }
        if (kind == BCKind::Navier) {
            for (int ix = 0; ix < Nx; ++ix) {
                double sgn = (ix % 2 == 0) ? 1.0 : -1.0;
                for (int iz = 0; iz < Nz; ++iz) {
                    M(3 * N, idx(VP, iz, ix)) = cb.wz[iz] * cb.wx * cb.J(iz, ix);
                    M(3 * N + 1, idx(VP, iz, ix)) = sgn * cb.wz[iz] * cb.wx;
                }
                M(idx(VW, 0, ix), 3 * N) = 1.0;
                M(idx(VW, 0, ix), 3 * N + 1) = sgn;
            }
        }
        return M;
    }

    const Eigen::PartialPivLU<MatrixXd>& dense_lu() const {
        std::lock_guard<std::mutex> lock(mu);
        if (!lu) {
            MatrixXd M = assemble_dense();
            lu.emplace(std::move(M));
            // crude conditioning probe from the U diagonal
            VectorXd d = lu->matrixLU().diagonal().cwiseAbs();
            double dmin = d.minCoeff(), dmax = d.maxCoeff();
            if (dmin <= 0.0 || dmin / dmax < 1e-15)
                throw SingularSystem(
                    "stokes: discrete system is rank-deficient (|U_min/U_max| = " +
                    std::to_string(dmin / dmax) + "); gamma too large or geometry degenerate?");
        }
        return *lu;
    }

    // ---- per-mode preconditioner -------------------------------------
    void build_preconditioner() const {
        const GridSpec& g = geom->grid;
        const int Nz = g.Nz, Nx = g.Nx;
        auto xmean = [&](const ArrayXXd& c) { return (c.rowwise().mean()).eval(); };
        auto xmean_s = [&](const ArrayXd& c) { return c.mean(); };

        struct MTerm {
            int var;
            int st;
            ArrayXd c;  // z profile
        };
        auto avg_terms = [&](const std::vector<VTerm>& src) {
            std::vector<MTerm> out;
            for (const auto& t : src) out.push_back({t.var, t.st, xmean(t.c)});
            return out;
        };
        auto momx = avg_terms(tables.momx);
        auto momz = avg_terms(tables.momz);
        auto divt = avg_terms(tables.divt);
        struct MSTerm {
            int var;
            int st;
            double c;
        };
        std::vector<MSTerm> bc1, bc2;
        for (const auto& t : tables.bc1) bc1.push_back({t.var, t.st, xmean_s(t.c)});
        for (const auto& t : tables.bc2) bc2.push_back({t.var, t.st, xmean_s(t.c)});

        const MatrixXd DZZ = cb.DZ * cb.DZ;
        // k = Nx/2 (Nyquist) uses a zero x-derivative multiplier, matching the
        // operator; the Navier borders attach to the k=0 and Nyquist blocks.
        auto block_for = [&](int k) {
            const bool bordered = (kind == BCKind::Navier) && (k == 0 || k == Nx / 2);
            const int bsz = 3 * Nz + (bordered ? 1 : 0);
            MatrixXcd B = MatrixXcd::Zero(bsz, bsz);
            Complex ik(0.0, (k == Nx / 2) ? 0.0 : static_cast<double>(k));
            auto add = [&](int row, const MTerm& t, int iz) {
                int base = t.var * Nz;
                switch (t.st) {
                    case ST_ID:
                        B(row, base + iz) += t.c[iz];
                        break;
                    case ST_DX:
                        B(row, base + iz) += t.c[iz] * ik;
                        break;
                    case ST_DXX:
                        B(row, base + iz) += t.c[iz] * ik * ik;
                        break;
                    case ST_DZ:
                        for (int jz = 0; jz < Nz; ++jz) B(row, base + jz) += t.c[iz] * cb.DZ(iz, jz);
                        break;
                    case ST_DZZ:
                        for (int jz = 0; jz < Nz; ++jz) B(row, base + jz) += t.c[iz] * DZZ(iz, jz);
                        break;
                    case ST_DXZ:
                        for (int jz = 0; jz < Nz; ++jz)
                            B(row, base + jz) += t.c[iz] * ik * cb.DZ(iz, jz);
                        break;
                }
            };
            for (int iz = 1; iz < Nz - 1; ++iz) {
                for (const auto& t : momx) add(VU * Nz + iz, t, iz);
                for (const auto& t : momz) add(VW * Nz + iz, t, iz);
            }
            for (int iz = 0; iz < Nz - 1; ++iz)
                for (const auto& t : divt) add(VP * Nz + iz, t, iz);
            for (const auto& t : momz) add(VP * Nz + (Nz - 1), t, Nz - 1);
            B(VU * Nz + Nz - 1, VU * Nz + Nz - 1) = 1.0;
            B(VW * Nz + Nz - 1, VW * Nz + Nz - 1) = 1.0;
            auto add_s = [&](int row, const MSTerm& t) {
                int base = t.var * Nz;
                switch (t.st) {
                    case ST_ID:
                        B(row, base + 0) += t.c;
                        break;
                    case ST_DX:
                        B(row, base + 0) += t.c * ik;
                        break;
                    case ST_DZ:
                        for (int jz = 0; jz < Nz; ++jz) B(row, base + jz) += t.c * cb.DZ(0, jz);
                        break;
                }
            };
            for (const auto& t : bc1) add_s(VU * Nz + 0, t);
            for (const auto& t : bc2) add_s(VW * Nz + 0, t);
            if (bordered) {
                if (k == 0) {
                    ArrayXd Jbar = xmean(cb.J);
                    for (int iz = 0; iz < Nz; ++iz)
                        B(3 * Nz, VP * Nz + iz) = cb.wz[iz] * cb.wx * Nx * Jbar[iz];
                } else {
                    for (int iz = 0; iz < Nz; ++iz)
                        B(3 * Nz, VP * Nz + iz) = cb.wz[iz] * cb.wx * Nx;
                }
                B(VW * Nz + 0, 3 * Nz) = 1.0;
            }
            return B;
        };

        mode_lu.clear();
        mode_lu.reserve(Nx / 2 + 1);
        for (int k = 0; k <= Nx / 2; ++k) {
            if (k == 0 || k == Nx / 2) {
                mode0_lu[k == 0 ? 0 : 1].emplace(block_for(k).real());
                mode_lu.emplace_back();  // placeholder to keep indices aligned
            } else {
                mode_lu.emplace_back(block_for(k));
            }
        }
    }

    VectorXd precond_solve(const VectorXd& r) const {
        const GridSpec& g = geom->grid;
        const int Nz = g.Nz, Nx = g.Nx;
        // r -> mode space
        std::vector<MatrixXcd> rc(3, MatrixXcd(Nz, Nx));
        for (int v = 0; v < 3; ++v) {
            Eigen::Map<const MatrixXd> f(r.data() + v * N, Nz, Nx);
            for (int iz = 0; iz < Nz; ++iz) {
                std::vector<Complex> c = dft_forward(f.row(iz).transpose());
                for (int i = 0; i < Nx; ++i) rc[v](iz, i) = c[i];
            }
        }
        std::vector<MatrixXcd> xc(3, MatrixXcd::Zero(Nz, Nx));
        double lam1 = 0.0, lam2 = 0.0;
        for (int k = 0; k <= Nx / 2; ++k) {
            const bool bordered = (kind == BCKind::Navier) && (k == 0 || k == Nx / 2);
            int bsz = 3 * Nz + (bordered ? 1 : 0);
            int col = k;  // FFT index of wavenumber k
            if (k == 0 || k == Nx / 2) {
                VectorXd rhs(bsz);
                for (int v = 0; v < 3; ++v)
                    for (int iz = 0; iz < Nz; ++iz) rhs[v * Nz + iz] = rc[v](iz, col).real();
                if (bordered) rhs[3 * Nz] = r[3 * N + (k == 0 ? 0 : 1)];
                VectorXd sol = mode0_lu[k == 0 ? 0 : 1]->solve(rhs);
                for (int v = 0; v < 3; ++v)
                    for (int iz = 0; iz < Nz; ++iz) xc[v](iz, col) = sol[v * Nz + iz];
                if (bordered) (k == 0 ? lam1 : lam2) = sol[3 * Nz];
                continue;
            }
            VectorXcd rhs(bsz);
            for (int v = 0; v < 3; ++v)
                for (int iz = 0; iz < Nz; ++iz) rhs[v * Nz + iz] = rc[v](iz, col);
            VectorXcd sol = mode_lu[k].solve(rhs);
            for (int v = 0; v < 3; ++v)
                for (int iz = 0; iz < Nz; ++iz) {
                    xc[v](iz, col) = sol[v * Nz + iz];
                    xc[v](iz, Nx - k) = std::conj(sol[v * Nz + iz]);
                }
        }
        VectorXd out(size);
        for (int v = 0; v < 3; ++v) {
            for (int iz = 0; iz < Nz; ++iz) {
                std::vector<Complex> c(Nx);
                for (int i = 0; i < Nx; ++i) c[i] = xc[v](iz, i);
                Eigen::VectorXd row = dft_inverse(c);
                for (int ix = 0; ix < Nx; ++ix) out[v * N + iz + Nz * ix] = row[ix];
            }
        }
        if (kind == BCKind::Navier) {
            out[3 * N] = lam1;
            out[3 * N + 1] = lam2;
        }
        return out;
    }

    VectorXd build_rhs(const StokesProblem& prob) const {
        const GridSpec& g = geom->grid;
        const int Nz = g.Nz, Nx = g.Nx;
        VectorXd b = VectorXd::Zero(size);
        const bool has_f = prob.f.ncomp() == 2;
        const bool has_g = prob.g.ncomp() == 1;
        Eigen::VectorXd bc1x, bc2x;
        if (kind == BCKind::Stress) {
            const auto& bc = std::get<StressBC>(prob.bc);
            bc1x = bc.kx.values();
            bc2x = bc.kz.values();
        } else {
            const auto& bc = std::get<NavierBC>(prob.bc);
            // tangential data tau.l with tau = (1, eta')
            SurfaceField taul = bc.lx + multiply(deriv_x(geom->eta), bc.lz);
            bc1x = taul.values();
            bc2x = bc.h.values();
        }
        for (int ix = 0; ix < Nx; ++ix) {
            b[idx(VU, 0, ix)] = bc1x[ix];
            b[idx(VW, 0, ix)] = bc2x[ix];
            if (has_f) {
                for (int iz = 1; iz < Nz - 1; ++iz) {
                    b[idx(VU, iz, ix)] = prob.f.block(0)(iz, ix);
                    b[idx(VW, iz, ix)] = prob.f.block(1)(iz, ix);
                }
                b[idx(VP, Nz - 1, ix)] = prob.f.block(1)(Nz - 1, ix);  // tau row data
            }
            if (has_g)
                for (int iz = 0; iz < Nz - 1; ++iz) b[idx(VP, iz, ix)] = prob.g.block(0)(iz, ix);
        }
        return b;
    }
};

// ------------------------------------------------------------- interface ---

StokesSolver::StokesSolver(std::shared_ptr<const FlatteningGeometry> geometry, double gamma,
                           BCKind kind, SolveMethod method)
    : impl_(std::make_unique<Impl>()) {
    impl_->geom = std::move(geometry);
    impl_->gamma = gamma;
    impl_->kind = kind;
    impl_->method = method;
    const GridSpec& g = impl_->geom->grid;
    impl_->N = g.Nx * g.Nz;
    impl_->size = 3 * impl_->N + (kind == BCKind::Navier ? 2 : 0);
    impl_->cb = CoeffBundle::build(impl_->geom->eta, impl_->geom->delta, g);
    impl_->tables = make_tables(impl_->cb, gamma, kind);
    if (gamma != 0.0) {
        double gs = estimate_gamma_star(*impl_->geom);
        if (std::abs(gamma) > gs)
            log_warn("stokes: |gamma| = " + std::to_string(std::abs(gamma)) +
                     " exceeds the discrete solvability heuristic gamma* = " + std::to_string(gs));
    }
}

StokesSolver::~StokesSolver() = default;
StokesSolver::StokesSolver(StokesSolver&&) noexcept = default;

const FlatteningGeometry& StokesSolver::geometry() const { return *impl_->geom; }
double StokesSolver::gamma() const { return impl_->gamma; }
StokesSolver::BCKind StokesSolver::kind() const { return impl_->kind; }
Eigen::MatrixXd StokesSolver::dense_matrix() const { return impl_->assemble_dense(); }
Eigen::VectorXd StokesSolver::apply_operator(const Eigen::VectorXd& x) const {
    return impl_->apply(x);
}


StokesSolution StokesSolver::solve(const StokesProblem& problem, ResidualPolicy rp) const {
    const Impl& im = *impl_;
    const GridSpec& g = im.geom->grid;
    const int Nz = g.Nz, Nx = g.Nx, N = im.N;

    if (im.kind == BCKind::Navier) {
        const auto& bc = std::get<NavierBC>(problem.bc);
        // l.N = 0 pointwise
        SurfaceField lN = multiply(im.geom->normal_x, bc.lx) + bc.lz;
        double lsc = std::max({bc.lx.max_abs(), bc.lz.max_abs(), 1.0});
        if (lN.max_abs() > 1e-10 * lsc)
            throw CompatibilityViolation("solve_navier: l.N != 0 (max " +
                                         std::to_string(lN.max_abs()) + ")");
        // int h = int g J
        double ih = 2.0 * M_PI * bc.h.mean();
        double ig = 0.0;
        if (problem.g.ncomp() == 1)
            for (int ix = 0; ix < Nx; ++ix)
                for (int iz = 0; iz < Nz; ++iz)
                    ig += im.cb.wz[iz] * im.cb.wx * im.cb.J(iz, ix) * problem.g.block(0)(iz, ix);
        double hsc = std::max({bc.h.max_abs(), problem.g.ncomp() ? problem.g.max_abs() : 0.0, 1.0});
        if (std::abs(ih - ig) > 1e-10 * hsc)
            throw CompatibilityViolation("solve_navier: int h != int g J (defect " +
                                         std::to_string(ih - ig) + ")");
    }

    VectorXd b = im.build_rhs(problem);
    double scale = b.cwiseAbs().maxCoeff();
    if (problem.f.ncomp() == 2) scale = std::max(scale, problem.f.max_abs());
    if (problem.g.ncomp() == 1) scale = std::max(scale, problem.g.max_abs());
    scale = std::max(scale, 1e-300);

    VectorXd x;
    int kry_its = -1;
    if (im.method == SolveMethod::Krylov) {
        {
            std::lock_guard<std::mutex> lock(im.mu);
            if (im.mode_lu.empty()) im.build_preconditioner();
        }
        auto applyA = [&](const VectorXd& v) { return im.apply(v); };
        auto applyM = [&](const VectorXd& v) { return im.precond_solve(v); };
        GmresResult gr = gmres(applyA, applyM, b, x, 1e-12, 80, 240);
        if (gr.converged) {
            kry_its = gr.iterations;
        } else {
            log_warn("stokes: GMRES stalled (residual " + std::to_string(gr.residual) +
                     "); falling back to the dense factorization");
            x = im.dense_lu().solve(b);
        }
    } else {
        x = im.dense_lu().solve(b);
    }

    StokesSolution sol;
    sol.krylov_iterations = kry_its;
    sol.v = VolumeField(g, 2);
    sol.p = VolumeField(g, 1);
    for (int ix = 0; ix < Nx; ++ix)
        for (int iz = 0; iz < Nz; ++iz) {
            sol.v.block(0)(iz, ix) = x[im.idx(VU, iz, ix)];
            sol.v.block(1)(iz, ix) = x[im.idx(VW, iz, ix)];
            sol.p.block(0)(iz, ix) = x[im.idx(VP, iz, ix)];
        }

    // algebraic residual on the native grid
    VectorXd r = im.apply(x) - b;
    sol.residuals.algebraic = r.cwiseAbs().maxCoeff() / scale;
    sol.residuals.data_scale = scale;
    if (sol.residuals.algebraic > 1e-8)
        throw SingularSystem("stokes: algebraic residual " +
                             std::to_string(sol.residuals.algebraic) +
                             " (rank-deficient beyond tolerance)");

    sol.residuals.noslip = std::max(sol.v.block(0).row(Nz - 1).cwiseAbs().maxCoeff(),
                                    sol.v.block(1).row(Nz - 1).cwiseAbs().maxCoeff());

    // J-weighted norms for the energy-bound report
    {
        double nv2 = 0.0, np2 = 0.0;
        MatrixXd uxg = ddx_grid(sol.v.block(0)), uzg = im.cb.DZ * sol.v.block(0);
        MatrixXd wxg = ddx_grid(sol.v.block(1)), wzg = im.cb.DZ * sol.v.block(1);
        for (int ix = 0; ix < Nx; ++ix)
            for (int iz = 0; iz < Nz; ++iz) {
                double wq = im.cb.wz[iz] * im.cb.wx * im.cb.J(iz, ix);
                double d1u = uxg(iz, ix) + im.cb.alpha(iz, ix) * uzg(iz, ix);
                double d2u = im.cb.beta(iz, ix) * uzg(iz, ix);
                double d1w = wxg(iz, ix) + im.cb.alpha(iz, ix) * wzg(iz, ix);
                double d2w = im.cb.beta(iz, ix) * wzg(iz, ix);
                nv2 += wq * (sol.v.block(0)(iz, ix) * sol.v.block(0)(iz, ix) +
                             sol.v.block(1)(iz, ix) * sol.v.block(1)(iz, ix) + d1u * d1u +
                             d2u * d2u + d1w * d1w + d2w * d2w);
                np2 += wq * sol.p.block(0)(iz, ix) * sol.p.block(0)(iz, ix);
            }
        sol.energy_ratio = (std::sqrt(nv2) + std::sqrt(np2)) / scale;
    }

    // divergence-theorem diagnostic: int v.N dx over the top boundary
    {
        SurfaceField u0 = SurfaceField::from_values(g, sol.v.block(0).row(0).transpose());
        SurfaceField w0 = SurfaceField::from_values(g, sol.v.block(1).row(0).transpose());
        SurfaceField vn = multiply(im.geom->normal_x, u0) + w0;
        sol.trace_mean = 2.0 * M_PI * vn.mean();
    }

    if (rp == ResidualPolicy::Full) {
        // re-substitution on the 2x-oversampled grid with the same delta
        GridSpec fg = g;
        fg.Nx *= 2;
        fg.Nz *= 2;
        CoeffBundle fcb = CoeffBundle::build(im.geom->eta, im.geom->delta, fg);
        TermTables ft = make_tables(fcb, im.gamma, im.kind);
        VolumeField vf = sol.v.oversampled(2, 2);
        VolumeField pf = sol.p.oversampled(2, 2);
        DerivGrids dg[3] = {DerivGrids::build(vf.block(0), fcb.DZ),
                            DerivGrids::build(vf.block(1), fcb.DZ),
                            DerivGrids::build(pf.block(0), fcb.DZ)};
        ArrayXXd momx = eval_terms(ft.momx, dg);
        ArrayXXd momz = eval_terms(ft.momz, dg);
        ArrayXXd divv = eval_terms(ft.divt, dg);
        VolumeField ffine(fg, 2), gfine(fg, 1);
        if (problem.f.ncomp() == 2) ffine = problem.f.oversampled(2, 2);
        if (problem.g.ncomp() == 1) gfine = problem.g.oversampled(2, 2);
        double mres = 0.0, dres = 0.0;
        for (int ix = 0; ix < fg.Nx; ++ix) {
            for (int iz = 1; iz < fg.Nz - 1; ++iz) {
                mres = std::max(mres, std::abs(momx(iz, ix) - ffine.block(0)(iz, ix)));
                mres = std::max(mres, std::abs(momz(iz, ix) - ffine.block(1)(iz, ix)));
            }
            for (int iz = 0; iz < fg.Nz; ++iz)
                dres = std::max(dres, std::abs(divv(iz, ix) - gfine.block(0)(iz, ix)));
        }
        ArrayXd bc1 = eval_surface_terms(ft.bc1, dg);
        ArrayXd bc2 = eval_surface_terms(ft.bc2, dg);
        Eigen::VectorXd bc1d, bc2d;
        if (im.kind == BCKind::Stress) {
            const auto& bc = std::get<StressBC>(problem.bc);
            bc1d = bc.kx.values_oversampled(2);
            bc2d = bc.kz.values_oversampled(2);
        } else {
            const auto& bc = std::get<NavierBC>(problem.bc);
            SurfaceField taul = bc.lx + multiply(deriv_x(im.geom->eta), bc.lz);
            bc1d = taul.values_oversampled(2);
            bc2d = bc.h.values_oversampled(2);
            SurfaceField nyq(g);
            nyq.raw()[g.Nx / 2] = Complex(1.0, 0.0);
            bc2 += x[3 * N] + x[3 * N + 1] * nyq.values_oversampled(2).array();
        }
        double bres = std::max((bc1 - bc1d.array()).abs().maxCoeff(),
                               (bc2 - bc2d.array()).abs().maxCoeff());
        sol.residuals.momentum = mres / scale;
        sol.residuals.divergence = dres / scale;
        sol.residuals.bc = bres / scale;
        sol.residuals.noslip = std::max(vf.block(0).row(fg.Nz - 1).cwiseAbs().maxCoeff(),
                                        vf.block(1).row(fg.Nz - 1).cwiseAbs().maxCoeff());
        double worst = std::max({sol.residuals.momentum, sol.residuals.divergence,
                                 sol.residuals.bc});
        if (worst > 1e-6)
            throw ResidualTooLarge("stokes: oversampled re-substitution residual " +
                                   std::to_string(worst) + " exceeds 1e-6 of the data scale");
    }
    return sol;
}

StokesSolution solve_stress(const StokesProblem& problem, SolveMethod method) {
    StokesSolver solver(problem.geometry, problem.gamma, StokesSolver::BCKind::Stress, method);
    return solver.solve(problem);
}

StokesSolution solve_navier(const StokesProblem& problem, SolveMethod method) {
    StokesSolver solver(problem.geometry, problem.gamma, StokesSolver::BCKind::Navier, method);
    return solver.solve(problem);
}

SurfaceField normal_trace(const FlatteningGeometry& geometry, const StokesSolution& sol) {
    const GridSpec& g = geometry.grid;
    SurfaceField u0 = SurfaceField::from_values(g, sol.v.block(0).row(0).transpose());
    SurfaceField w0 = SurfaceField::from_values(g, sol.v.block(1).row(0).transpose());
    return multiply(geometry.normal_x, u0) + w0;
}

SurfaceField normal_stress_trace(const FlatteningGeometry& geometry, const StokesSolution& sol) {
    const GridSpec& g = geometry.grid;
    const double b = g.b;
    MatrixXd DZ = (2.0 / b) * cheb::diff_matrix(g.Nz);
    MatrixXd uz = DZ * sol.v.block(0), wz = DZ * sol.v.block(1);
    MatrixXd ux = ddx_grid(sol.v.block(0)), wx = ddx_grid(sol.v.block(1));
    Eigen::VectorXd a0 = geometry.A21().row(0).transpose(), b0 = geometry.A22().row(0).transpose();
    auto surf = [&](const MatrixXd& m) {
        return SurfaceField::from_values(g, m.row(0).transpose());
    };
    Eigen::VectorXd
        d1u = ux.row(0).transpose().array() + a0.array() * uz.row(0).transpose().array(),
        d2u = b0.array() * uz.row(0).transpose().array(),
        d1w = wx.row(0).transpose().array() + a0.array() * wz.row(0).transpose().array(),
        d2w = b0.array() * wz.row(0).transpose().array();
    SurfaceField etap = deriv_x(geometry.eta);
    SurfaceField D1u = SurfaceField::from_values(g, d1u), D2u = SurfaceField::from_values(g, d2u);
    SurfaceField D1w = SurfaceField::from_values(g, d1w), D2w = SurfaceField::from_values(g, d2w);
    // N^T D N = 2 D1u eta'^2 - 2 eta'(D2u + D1w) + 2 D2w
    SurfaceField ndn = 2.0 * multiply(multiply(etap, etap), D1u) -
                       2.0 * multiply(etap, D2u + D1w) + 2.0 * D2w;
    SurfaceField n2inv = apply_pointwise(etap, [](double p) { return 1.0 / (1.0 + p * p); });
    return surf(sol.p.block(0)) - multiply(ndn, n2inv);
}

VolumeField convective_forcing(const FlatteningGeometry& geometry, const VolumeField& v) {
    const GridSpec& g = geometry.grid;
    const MatrixXd DZ = (2.0 / g.b) * cheb::diff_matrix(g.Nz);
    const MatrixXd& alpha = geometry.A21();
    const MatrixXd& beta = geometry.A22();
    // dealiased per-row products in x
    auto vmul = [&](const MatrixXd& a, const MatrixXd& c) {
        MatrixXd out(g.Nz, g.Nx);
        for (int iz = 0; iz < g.Nz; ++iz) {
            SurfaceField fa = SurfaceField::from_values(g, a.row(iz).transpose());
            SurfaceField fc = SurfaceField::from_values(g, c.row(iz).transpose());
            out.row(iz) = multiply(fa, fc).values().transpose();
        }
        return out;
    };
    VolumeField f(g, 2);
    for (int comp = 0; comp < 2; ++comp) {
        const MatrixXd& vi = v.block(comp);
        MatrixXd vix = ddx_grid(vi), viz = DZ * vi;
        MatrixXd d1 = vix + alpha.cwiseProduct(viz);
        MatrixXd d2 = beta.cwiseProduct(viz);
        f.block(comp) = -(vmul(v.block(0), d1) + vmul(v.block(1), d2));
    }
    return f;
}

namespace {

StokesSolution picard_loop(std::shared_ptr<const FlatteningGeometry> geometry, double gamma,
                           const StokesProblem& base, StokesSolver::BCKind kind, double tol,
                           PicardReport* report, const StokesSolver* cached) {
    std::optional<StokesSolver> own;
    const StokesSolver* solver = cached;
    if (!solver) {
        own.emplace(geometry, gamma, kind, SolveMethod::Dense);
        solver = &*own;
    }
    StokesProblem prob = base;
    StokesSolution sol = solver->solve(prob, ResidualPolicy::Cheap);
    double scale = sol.v.max_abs();
    PicardReport rep;
    rep.iterations = 1;
    if (scale < 1e-250) {  // linear solve already exact (nonlinearity vanishes)
        if (report) *report = rep;
        return sol;
    }
    double prev_err = -1.0;
    int bad = 0;
    const int max_iter = 40;
    StokesSolution last = sol;
    for (int it = 0; it < max_iter; ++it) {
        prob.f = convective_forcing(*geometry, last.v);
        if (base.f.ncomp() == 2) prob.f += base.f;
        StokesSolution next = solver->solve(prob, ResidualPolicy::Cheap);
        VolumeField diff = next.v;
        diff -= last.v;
        double err = diff.max_abs();
        rep.iterations = it + 2;
        if (prev_err > 0.0 && err > 10.0 * tol * scale) {
            double ratio = err / prev_err;
            rep.contraction_ratios.push_back(ratio);
            if (ratio >= 1.0 && err < 1e-11 * scale) {
                last = next;  // stalled at the attainable floor; accept
                break;
            }
            bad = (ratio >= 1.0) ? bad + 1 : 0;
            if (bad >= 3)
                throw NoContraction("navier-stokes picard: ratio >= 1 for 3 iterations "
                                    "(data too large for the smallness hypothesis)");
        }
        prev_err = std::max(err, 1e-300);
        last = next;
        if (err < tol * scale) break;
        if (it == max_iter - 1)
            throw MaxIterExceeded("navier-stokes picard: no convergence in " +
                                  std::to_string(max_iter) + " iterations");
    }
    if (report) *report = rep;
    return last;
}

}  // namespace

StokesSolution solve_navier_stokes_stress(std::shared_ptr<const FlatteningGeometry> geometry,
                                          double gamma, const SurfaceField& chi, double tol,
                                          PicardReport* report, const StokesSolver* cached) {
    StokesProblem prob;
    prob.geometry = geometry;
    prob.gamma = gamma;
    StressBC bc;
    bc.kx = multiply(geometry->normal_x, chi);
    bc.kz = chi;
    prob.bc = bc;
    return picard_loop(geometry, gamma, prob, StokesSolver::BCKind::Stress, tol, report, cached);
}

StokesSolution solve_navier_stokes_dirichlet(std::shared_ptr<const FlatteningGeometry> geometry,
                                             double gamma, const SurfaceField& h, double tol,
                                             PicardReport* report, const StokesSolver* cached) {
    StokesProblem prob;
    prob.geometry = geometry;
    prob.gamma = gamma;
    NavierBC bc;
    bc.lx = SurfaceField(geometry->grid);
    bc.lz = SurfaceField(geometry->grid);
    bc.h = h;
    prob.bc = bc;
    return picard_loop(geometry, gamma, prob, StokesSolver::BCKind::Navier, tol, report, cached);
}

double estimate_gamma_star(const FlatteningGeometry& geometry) {
    // Coarse probe grid; the heuristic needs two digits, not spectral accuracy.
    GridSpec pg = geometry.grid;
    pg.Nx = std::min(pg.Nx, 16);
    pg.Nz = std::min(pg.Nz, 10);
    const int Nz = pg.Nz, Nx = pg.Nx, N = Nx * Nz;
    CoeffBundle cb = CoeffBundle::build(geometry.eta, geometry.delta, pg);

    MatrixXd DXs = ddx_grid(MatrixXd::Identity(Nx, Nx)).transpose();
    // D1, D2 as dense N x N operators (n = iz + Nz*ix)
    MatrixXd D1 = MatrixXd::Zero(N, N), D2 = MatrixXd::Zero(N, N);
    for (int ix = 0; ix < Nx; ++ix)
        for (int iz = 0; iz < Nz; ++iz) {
            int r = iz + Nz * ix;
            for (int jx = 0; jx < Nx; ++jx) D1(r, iz + Nz * jx) += DXs(ix, jx);
            for (int jz = 0; jz < Nz; ++jz) {
                D1(r, jz + Nz * ix) += cb.alpha(iz, ix) * cb.DZ(iz, jz);
                D2(r, jz + Nz * ix) += cb.beta(iz, ix) * cb.DZ(iz, jz);
            }
        }
    VectorXd wq(N);
    for (int ix = 0; ix < Nx; ++ix)
        for (int iz = 0; iz < Nz; ++iz) wq[iz + Nz * ix] = cb.wz[iz] * cb.wx * cb.J(iz, ix);
    MatrixXd W = wq.asDiagonal();

    // E11 = 2 D1 u, E22 = 2 D2 w, E12 = D2 u + D1 w over stacked (u, w)
    MatrixXd E11(N, 2 * N), E22(N, 2 * N), E12(N, 2 * N);
    E11 << 2.0 * D1, MatrixXd::Zero(N, N);
    E22 << MatrixXd::Zero(N, N), 2.0 * D2;
    E12 << D2, D1;
    MatrixXd K = E11.transpose() * W * E11 + 2.0 * E12.transpose() * W * E12 +
                 E22.transpose() * W * E22;
    MatrixXd G1(N, 2 * N), G2(N, 2 * N), Iu(N, 2 * N), Iw(N, 2 * N);
    G1 << D1, MatrixXd::Zero(N, N);
    G2 << D2, MatrixXd::Zero(N, N);
    Iu << MatrixXd::Identity(N, N), MatrixXd::Zero(N, N);
    Iw << MatrixXd::Zero(N, N), MatrixXd::Identity(N, N);
    MatrixXd H1w(N, 2 * N), H2w(N, 2 * N);
    H1w << MatrixXd::Zero(N, N), D1;
    H2w << MatrixXd::Zero(N, N), D2;
    MatrixXd M = Iu.transpose() * W * Iu + Iw.transpose() * W * Iw + G1.transpose() * W * G1 +
                 G2.transpose() * W * G2 + H1w.transpose() * W * H1w + H2w.transpose() * W * H2w;

    // eliminate the no-slip dofs at z = -b
    std::vector<int> keep;
    for (int v = 0; v < 2; ++v)
        for (int ix = 0; ix < Nx; ++ix)
            for (int iz = 0; iz < Nz - 1; ++iz) keep.push_back(v * N + iz + Nz * ix);
    const int nk = static_cast<int>(keep.size());
    MatrixXd Kk(nk, nk), Mk(nk, nk);
    for (int i = 0; i < nk; ++i)
        for (int j = 0; j < nk; ++j) {
            Kk(i, j) = K(keep[i], keep[j]);
            Mk(i, j) = M(keep[i], keep[j]);
        }
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(Kk, Mk);
    double lmin = es.eigenvalues().minCoeff();
    return std::max(lmin, 0.0) / 4.0;
}

}  // namespace stokeswave
