#pragma once

// Traveling-wave surfaces by Banach fixed point: the Stokes map
//   G_gamma(f) = T^{-1} Psi0[eta*]^{-1}( -gamma d1(eta*+f)
//                 - (Psi0[eta*+f]-Psi0[eta*])(T f + R(f)) ) - T^{-1} R(f)
// and its Navier-Stokes counterpart with Phi_gamma / Xi_gamma, plus
// warm-started continuation in the speed gamma.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stokeswave/capgrav.hpp"
#include "stokeswave/nsnd.hpp"

namespace stokeswave {

enum class WaveModel { Stokes, NavierStokes };

struct TravelingWaveResult {
    SurfaceField eta_star;
    SurfaceField f;  // perturbation, eta_w = eta* + f
    double gamma = 0.0;
    int iterations = 0;
    std::vector<double> contraction_ratios;
    std::vector<double> mean_history;       // mean(f) per iteration (drift diagnostic)
    std::vector<double> projected_mass;     // mass removed before Psi^{-1}, per iteration
    double fixed_point_defect = 0.0;   // ||G(f) - f||_{H^{3/2}}
    double residual = 0.0;             // L2 norm of the original equation defect
    bool converged = false;
    std::string failure;

    SurfaceField eta_w() const { return eta_star + f; }
};

// Shared state for one (phi, params) family: eta* and its cached operators.
class TravelingWaveProblem {
  public:
    TravelingWaveProblem(const SurfaceField& phi, const CapGravParams& params,
                         double newton_tol = 1e-12);

    const SurfaceField& phi() const { return phi_; }
    const SurfaceField& eta_star() const { return eta_star_; }
    const CapGravParams& params() const { return params_; }
    const TEtaOperator& t_eta() const { return t_star_; }
    // gamma = 0 operator at eta* (Stokes map); gamma-dependent ones are
    // created per solve for the NS map.
    const PsiOperator& psi_star() const { return psi_star_; }
    std::shared_ptr<const FlatteningGeometry> geometry_star() const { return geom_star_; }

    // One application of the Stokes fixed-point map.
    SurfaceField g_map(const SurfaceField& f, double gamma, double* projected_mass = nullptr) const;
    // One application of the Navier-Stokes map F_gamma.
    SurfaceField f_map(const SurfaceField& f, double gamma, const PsiOperator& psi_gamma_star,
                       double inner_tol, double* projected_mass = nullptr) const;

    // Residual of the original traveling-wave equation at eta_w:
    //   gamma d1 eta_w + Psi0[eta_w]((sigma H + g I)(eta_w) + phi)     (Stokes)
    //   gamma d1 eta_w + Phi_gamma[eta_w](...)                        (NS)
    double equation_residual(const SurfaceField& eta_w, double gamma, WaveModel model,
                             double inner_tol = 1e-11) const;

  private:
    SurfaceField phi_;
    CapGravParams params_;
    SurfaceField eta_star_;
    std::shared_ptr<const FlatteningGeometry> geom_star_;
    TEtaOperator t_star_;
    PsiOperator psi_star_;
};

TravelingWaveResult solve_traveling_stokes(const TravelingWaveProblem& problem, double gamma,
                                           double tol = 1e-10, int max_iter = 60,
                                           const SurfaceField* f0 = nullptr);

TravelingWaveResult solve_traveling_ns(const TravelingWaveProblem& problem, double gamma,
                                       double tol = 1e-10, int max_iter = 60,
                                       const SurfaceField* f0 = nullptr);

struct ContinuationReport {
    std::vector<TravelingWaveResult> results;
    double gamma_frontier = 0.0;  // largest |gamma| reached before failure
};

// Warm-started sweep; per-step failures are recorded and the sweep continues.
ContinuationReport continuation_in_gamma(const TravelingWaveProblem& problem,
                                         const std::vector<double>& gamma_targets, WaveModel model,
                                         double tol = 1e-10, int max_iter = 60);

}  // namespace stokeswave
