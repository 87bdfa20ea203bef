#include "stokeswave/traveling.hpp"

#include <cmath>

#include "stokeswave/util.hpp"

namespace stokeswave {

TravelingWaveProblem::TravelingWaveProblem(const SurfaceField& phi, const CapGravParams& params,
                                           double newton_tol)
    : phi_(phi),
      params_(params),
      eta_star_(capgrav_solve(phi, params, newton_tol)),
      geom_star_(std::make_shared<FlatteningGeometry>(
          build_geometry(eta_star_, [&] {
              GridSpec g = phi.grid();
              g.b = params.b;
              return g;
          }()))),
      t_star_(eta_star_, params),
      psi_star_(geom_star_, 0.0) {}

SurfaceField TravelingWaveProblem::g_map(const SurfaceField& f, double gamma,
                                         double* projected_mass) const {
    const GridSpec& grid = geom_star_->grid;
    SurfaceField eta = eta_star_ + f;
    if (min_oversampled(eta, 4) + params_.b <= 0.0)
        throw DepthViolation("g_map: min(eta*+f+b) <= 0");

    // T_{eta*} f + R_{eta*}(f)
    SurfaceField tf = t_star_.apply(f);
    SurfaceField rf = r_eta(eta_star_, f, params_);
    SurfaceField arg = tf + rf;

    // (Psi0[eta*+f] - Psi0[eta*]) arg
    auto geom_f = std::make_shared<FlatteningGeometry>(build_geometry(eta, grid));
    PsiOperator psi_f(geom_f, 0.0);
    SurfaceField psi_diff = psi_apply(psi_f, arg) - psi_apply(psi_star_, arg);

    SurfaceField inner = -gamma * deriv_x(eta);
    inner -= psi_diff;
    // the argument of Psi^{-1} is analytically mean-zero; project and log
    if (projected_mass) *projected_mass = 2.0 * M_PI * inner.mean();
    inner = project_mean_zero(inner);

    SurfaceField out = t_star_.solve(psi_inverse_apply(psi_star_, inner));
    out -= t_star_.solve(rf);
    return out;
}

SurfaceField TravelingWaveProblem::f_map(const SurfaceField& f, double gamma,
                                         const PsiOperator& psi_gamma_star, double inner_tol,
                                         double* projected_mass) const {
    const GridSpec& grid = geom_star_->grid;
    SurfaceField eta = eta_star_ + f;
    if (min_oversampled(eta, 4) + params_.b <= 0.0)
        throw DepthViolation("f_map: min(eta*+f+b) <= 0");

    SurfaceField tf = t_star_.apply(f);
    SurfaceField rf = r_eta(eta_star_, f, params_);
    SurfaceField arg = tf + rf;

    auto geom_f = std::make_shared<FlatteningGeometry>(build_geometry(eta, grid));
    PsiOperator phi_f(geom_f, gamma);
    SurfaceField phi_diff = phi_apply(phi_f, arg, inner_tol) -
                            phi_apply(psi_gamma_star, arg, inner_tol);

    SurfaceField inner = -gamma * deriv_x(eta);
    inner -= phi_diff;
    if (projected_mass) *projected_mass = 2.0 * M_PI * inner.mean();
    inner = project_mean_zero(inner);

    SurfaceField out = t_star_.solve(phi_inverse_apply(psi_gamma_star, inner, inner_tol));
    out -= t_star_.solve(rf);
    return out;
}

double TravelingWaveProblem::equation_residual(const SurfaceField& eta_w, double gamma,
                                               WaveModel model, double inner_tol) const {
    SurfaceField chi = capgrav_apply(eta_w, params_);
    chi += phi_;
    auto geom_w = std::make_shared<FlatteningGeometry>(build_geometry(eta_w, geom_star_->grid));
    SurfaceField res(eta_w.grid());
    if (model == WaveModel::Stokes) {
        PsiOperator psi_w(geom_w, 0.0);
        res = psi_apply(psi_w, chi);
    } else {
        PsiOperator phi_w(geom_w, gamma);
        res = phi_apply(phi_w, chi, inner_tol);
    }
    res += gamma * deriv_x(eta_w);
    return sobolev_norm(res, 0.0);
}

namespace {

TravelingWaveResult iterate_map(const TravelingWaveProblem& problem, double gamma, double tol,
                                int max_iter, const SurfaceField* f0, WaveModel model) {
    TravelingWaveResult result;
    result.eta_star = problem.eta_star();
    result.gamma = gamma;

    const GridSpec& grid = problem.eta_star().grid();
    SurfaceField f = f0 ? *f0 : SurfaceField(grid);

    std::optional<PsiOperator> psi_gamma_star;
    if (model == WaveModel::NavierStokes)
        psi_gamma_star.emplace(problem.geometry_star(), gamma);
    const double inner_tol = std::min(tol, 1e-10);

    double prev_step = -1.0;
    int bad = 0;
    for (int it = 0; it < max_iter; ++it) {
        double mass = 0.0;
        SurfaceField next = (model == WaveModel::Stokes)
                                ? problem.g_map(f, gamma, &mass)
                                : problem.f_map(f, gamma, *psi_gamma_star, inner_tol, &mass);
        double step = sobolev_norm(next - f, 1.5);
        result.iterations = it + 1;
        result.mean_history.push_back(next.mean());
        result.projected_mass.push_back(mass);
        if (prev_step > 0.0) {
            double ratio = step / prev_step;
            result.contraction_ratios.push_back(ratio);
            bad = (ratio >= 1.0 && step > 10.0 * tol) ? bad + 1 : 0;
            if (bad >= 3) {
                result.failure = "NoContraction: ratio >= 1 for 3 consecutive iterations";
                result.f = next;
                return result;
            }
        }
        prev_step = std::max(step, 1e-300);
        f = next;
        if (step < tol) {
            result.f = f;
            result.fixed_point_defect = step;
            result.converged = true;
            break;
        }
        if (it == max_iter - 1) {
            result.failure = "MaxIterExceeded after " + std::to_string(max_iter) + " iterations";
            result.f = f;
            return result;
        }
    }
    result.residual = problem.equation_residual(result.eta_w(), gamma, model, inner_tol);
    return result;
}

}  // namespace

TravelingWaveResult solve_traveling_stokes(const TravelingWaveProblem& problem, double gamma,
                                           double tol, int max_iter, const SurfaceField* f0) {
    return iterate_map(problem, gamma, tol, max_iter, f0, WaveModel::Stokes);
}

TravelingWaveResult solve_traveling_ns(const TravelingWaveProblem& problem, double gamma,
                                       double tol, int max_iter, const SurfaceField* f0) {
    return iterate_map(problem, gamma, tol, max_iter, f0, WaveModel::NavierStokes);
}

ContinuationReport continuation_in_gamma(const TravelingWaveProblem& problem,
                                         const std::vector<double>& gamma_targets, WaveModel model,
                                         double tol, int max_iter) {
    ContinuationReport report;
    SurfaceField warm(problem.eta_star().grid());
    bool have_warm = false;
    for (double gamma : gamma_targets) {
        try {
            TravelingWaveResult r =
                (model == WaveModel::Stokes)
                    ? solve_traveling_stokes(problem, gamma, tol, max_iter,
                                             have_warm ? &warm : nullptr)
                    : solve_traveling_ns(problem, gamma, tol, max_iter,
                                         have_warm ? &warm : nullptr);
            if (r.converged) {
                warm = r.f;
                have_warm = true;
                report.gamma_frontier = std::max(report.gamma_frontier, std::abs(gamma));
            }
            report.results.push_back(std::move(r));
        } catch (const Error& e) {
            TravelingWaveResult r;
            r.eta_star = problem.eta_star();
            r.gamma = gamma;
            r.failure = e.what();
            report.results.push_back(std::move(r));
        }
    }
    return report;
}

}  // namespace stokeswave
