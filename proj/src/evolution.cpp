#include "stokeswave/evolution.hpp"

#include <cmath>

#include "stokeswave/util.hpp"

namespace stokeswave {

SurfaceField evolution_rhs(const SurfaceField& eta, double gamma, const SurfaceField& phi,
                           const CapGravParams& params, double epsilon, SolveMethod method) {
    GridSpec grid = eta.grid();
    grid.b = params.b;
    if (min_oversampled(eta, 4) + params.b <= 0.0)
        throw DepthViolation("evolution_rhs: min(eta + b) <= 0");
    auto geom = std::make_shared<FlatteningGeometry>(build_geometry(eta, grid));
    PsiOperator psi(geom, 0.0, method);
    SurfaceField chi = capgrav_apply(eta, params);
    chi += phi;
    SurfaceField out = psi_apply(psi, chi);  // mean-zero
    out += gamma * deriv_x(eta);
    if (epsilon > 0.0) {
        SurfaceField lap = deriv_x(eta, 2);
        out += epsilon * lap;
    }
    return out;
}

double energy(const SurfaceField& f, const TEtaOperator& t_eta_star, double a_weight,
              int s_index) {
    SurfaceField low = f;
    double e = 0.5 * a_weight * inner_l2(low, t_eta_star.apply(low));
    SurfaceField high = deriv_x(f, s_index + 1);
    e += 0.5 * inner_l2(high, t_eta_star.apply(high));
    return e;
}

namespace {

struct Stepper {
    const SurfaceField& phi;
    const CapGravParams& params;
    const EvolutionConfig& cfg;
    // IMEX state: dense factorization of (I - dt L) over the full real basis
    std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> imex_lu;
    Eigen::MatrixXd L;  // frozen linear matrix incl. the eps Laplacian
    const SurfaceField* ref = nullptr;  // linearization point for IMEX

    SurfaceField rhs(const SurfaceField& eta) const {
        return evolution_rhs(eta, cfg.gamma, phi, params, cfg.epsilon, cfg.solve_method);
    }

    void setup_imex(const SurfaceField& eta_ref) {
        GridSpec grid = eta_ref.grid();
        grid.b = params.b;
        auto geom = std::make_shared<FlatteningGeometry>(build_geometry(eta_ref, grid));
        PsiOperator psi(geom, 0.0, cfg.solve_method);
        TEtaOperator t_ref(eta_ref, params);
        L = frozen_linear_matrix(psi, t_ref, cfg.gamma);
        const int nb = static_cast<int>(L.rows());
        // eps Laplacian is linear and diagonal; fold it into L
        if (cfg.epsilon > 0.0) {
            for (int j = 1; j < nb; ++j) {
                int k = (j + 1) / 2;
                L(j, j) += -cfg.epsilon * k * k;
            }
        }
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(nb, nb) - cfg.dt * L;
        imex_lu.emplace(A);
    }

    SurfaceField step(const SurfaceField& eta) const {
        if (cfg.scheme == Scheme::Rk4Explicit) {
            const double h = cfg.dt;
            SurfaceField k1 = rhs(eta);
            SurfaceField k2 = rhs(eta + (h / 2) * k1);
            SurfaceField k3 = rhs(eta + (h / 2) * k2);
            SurfaceField k4 = rhs(eta + h * k3);
            SurfaceField out = eta;
            out += (h / 6) * k1;
            out += (h / 3) * k2;
            out += (h / 3) * k3;
            out += (h / 6) * k4;
            return out;
        }
        // IMEX Euler on the frozen linear part: (I - dt L) eta_{n+1} =
        // eta_n + dt (rhs(eta_n) - L eta_n). Reproduces equilibria exactly.
        Eigen::VectorXd c = real_basis_coords(eta);
        Eigen::VectorXd n = real_basis_coords(rhs(eta));
        Eigen::VectorXd rhsv = c + cfg.dt * (n - L * c);
        Eigen::VectorXd next = imex_lu->solve(rhsv);
        return from_real_basis_coords(eta.grid(), next);
    }
};

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y, double f0_norm) {
    // least squares on log y over the trailing half, skipping roundoff floor
    DecayFit fit;
    std::vector<double> ts, ls;
    size_t begin = t.size() / 2;
    for (size_t i = begin; i < t.size(); ++i) {
        if (y[i] < 1e-13) break;
        ts.push_back(t[i]);
        ls.push_back(std::log(y[i]));
    }
    if (ts.size() < 4) return fit;
    double n = static_cast<double>(ts.size());
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sl += ls[i];
        stt += ts[i] * ts[i];
        stl += ts[i] * ls[i];
    }
    double slope = (n * stl - st * sl) / (n * stt - st * st);
    double intercept = (sl - slope * st) / n;
    fit.c0 = -slope;
    fit.m2 = std::exp(intercept) / std::max(f0_norm, 1e-300);
    double ss = 0.0, lmin = ls[0], lmax = ls[0];
    for (size_t i = 0; i < ts.size(); ++i) {
        double r = ls[i] - (intercept + slope * ts[i]);
        ss += r * r;
        lmin = std::min(lmin, ls[i]);
        lmax = std::max(lmax, ls[i]);
    }
    double range = std::max(lmax - lmin, 1e-300);
    fit.fit_residual = std::sqrt(ss / n) / range;
    fit.t_begin = ts.front();
    fit.t_end = ts.back();
    return fit;
}

}  // namespace

EvolutionTrace evolve(const SurfaceField& eta0, const SurfaceField& phi,
                      const CapGravParams& params, const EvolutionConfig& config,
                      const SurfaceField* reference) {
    config.validate();
    params.validate();
    if (min_oversampled(eta0, 4) + params.b <= 0.0)
        throw DepthViolation("evolve: min(eta0 + b) <= 0");

    SurfaceField ref = reference ? *reference : eta0;
    TEtaOperator t_ref(ref, params);

    Stepper stepper{phi, params, config, std::nullopt, Eigen::MatrixXd(), nullptr};
    if (config.scheme == Scheme::ImexFrozen) stepper.setup_imex(ref);

    EvolutionTrace trace;
    const int nsteps = static_cast<int>(std::round(config.t_final / config.dt));
    SurfaceField eta = eta0;

    auto record = [&](double t, const SurfaceField& state) {
        SurfaceField f = state - ref;
        trace.times.push_back(t);
        trace.norms_hs1.push_back(sobolev_norm(f, config.s_index + 1));
        trace.energies.push_back(
            energy(project_mean_zero(f), t_ref, config.energy_weight, config.s_index));
        trace.means.push_back(state.mean());
        trace.min_depths.push_back(min_oversampled(state, 4) + params.b);
        trace.states.push_back(state);
    };
    record(0.0, eta);

    double prev_norm = std::max(sobolev_norm(eta, config.s_index + 1), 1e-300);
    for (int n = 1; n <= nsteps; ++n) {
        SurfaceField next(eta.grid());
        try {
            next = stepper.step(eta);
        } catch (const DepthViolation& e) {
            trace.status = EvolveStatus::DepthViolationHalt;
            trace.note = e.what();
            return trace;
        }
        double nn = sobolev_norm(next, config.s_index + 1);
        if (!std::isfinite(nn) || nn > 10.0 * std::max(prev_norm, 1.0)) {
            trace.status = EvolveStatus::StepRejected;
            trace.note = "StepRejected: norm grew from " + std::to_string(prev_norm) + " to " +
                         std::to_string(nn) + " in one step (CFL-style instability)";
            return trace;
        }
        prev_norm = std::max(nn, 1e-300);
        eta = next;
        if (n % config.record_every == 0 || n == nsteps)
            record(n * config.dt, eta);
    }
    return trace;
}

EvolutionTrace stability_experiment(const SurfaceField& eta_w, const SurfaceField& phi,
                                    const CapGravParams& params, const SurfaceField& f0,
                                    const EvolutionConfig& config) {
    SurfaceField eta0 = eta_w + f0;
    EvolutionTrace trace = evolve(eta0, phi, params, config, &eta_w);
    double f0n = sobolev_norm(f0, config.s_index + 1);
    if (f0n > 0.0 && trace.times.size() >= 8)
        trace.decay_fit = fit_decay(trace.times, trace.norms_hs1, f0n);
    // E(t) nonincreasing after the transient window (trailing half)
    size_t begin = trace.energies.size() / 2;
    double tol = 1e-10 * std::max(1.0, trace.energies.empty() ? 0.0 : trace.energies[begin]);
    for (size_t i = begin + 1; i < trace.energies.size(); ++i)
        if (trace.energies[i] > trace.energies[i - 1] + tol) {
            trace.energy_nonincreasing_tail = false;
            break;
        }
    return trace;
}

Eigen::MatrixXd frozen_linear_matrix(const PsiOperator& psi_star, const TEtaOperator& t_star,
                                     double gamma) {
    const GridSpec& grid = psi_star.geometry().grid;
    const int nb = real_basis_size(grid);
    Eigen::MatrixXd L(nb, nb);
    for (int j = 0; j < nb; ++j) {
        SurfaceField e = real_basis_field(grid, j);
        SurfaceField le = psi_apply(psi_star, t_star.apply(e));
        le += gamma * deriv_x(e);
        L.col(j) = real_basis_coords(le);
    }
    return L;
}

}  // namespace stokeswave
