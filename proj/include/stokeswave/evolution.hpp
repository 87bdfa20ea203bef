#pragma once

// Time integration of the dynamic free-boundary Stokes equation in the
// moving frame,
//     d_t eta = gamma d1 eta + Psi0[eta](sigma H(eta) + g eta + phi) [+ eps Lap eta],
// the frozen-linear IMEX option, the stability energy functional, and the
// exponential-decay measurement.

#include <optional>
#include <string>
#include <vector>

#include "stokeswave/capgrav.hpp"
#include "stokeswave/nsnd.hpp"

namespace stokeswave {

enum class Scheme { Rk4Explicit, ImexFrozen };

struct EvolutionConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    double epsilon = 0.0;  // viscosity of the regularized flow (>= 0)
    Scheme scheme = Scheme::Rk4Explicit;
    int record_every = 1;
    double gamma = 0.0;
    int s_index = 2;              // Sobolev index s; norms recorded in H^{s+1}
    double energy_weight = 4.0;   // the A weight of the low-order energy block
    SolveMethod solve_method = SolveMethod::Krylov;

    void validate() const {
        if (!(dt > 0.0) || t_final < dt)
            throw ConfigError("EvolutionConfig: need dt > 0 and T_final >= dt");
        if (epsilon < 0.0) throw ConfigError("EvolutionConfig: epsilon must be >= 0");
    }
};

enum class EvolveStatus { Completed, StepRejected, DepthViolationHalt };

struct DecayFit {
    double c0 = 0.0;         // fitted rate
    double m2 = 0.0;         // fitted prefactor (relative to ||f0||)
    double fit_residual = 0.0;  // RMS residual / signal range of the log fit
    double t_begin = 0.0, t_end = 0.0;
};

struct EvolutionTrace {
    std::vector<double> times;
    std::vector<double> norms_hs1;   // H^{s+1} norm of eta - reference
    std::vector<double> energies;    // E(t) of the perturbation
    std::vector<double> means;       // mean(eta)
    std::vector<double> min_depths;  // min(eta + b)
    std::vector<SurfaceField> states;  // subsampled per record_every
    EvolveStatus status = EvolveStatus::Completed;
    std::string note;
    std::optional<DecayFit> decay_fit;
    bool energy_nonincreasing_tail = true;  // after the transient window
};

// Right side of the dynamic equation; mean-zero by construction.
SurfaceField evolution_rhs(const SurfaceField& eta, double gamma, const SurfaceField& phi,
                           const CapGravParams& params, double epsilon = 0.0,
                           SolveMethod method = SolveMethod::Krylov);

// E = A/2 <f, T f> + 1/2 <d^(s+1) f, T d^(s+1) f>  (d = 1).
double energy(const SurfaceField& f, const TEtaOperator& t_eta_star, double a_weight,
              int s_index);

// Advances eta0; norms/energy are measured against `reference` when given
// (the traveling wave), else against eta0.
EvolutionTrace evolve(const SurfaceField& eta0, const SurfaceField& phi,
                      const CapGravParams& params, const EvolutionConfig& config,
                      const SurfaceField* reference = nullptr);

// Evolves eta_w + f0 and fits the decay rate on the trailing half-trace.
EvolutionTrace stability_experiment(const SurfaceField& eta_w, const SurfaceField& phi,
                                    const CapGravParams& params, const SurfaceField& f0,
                                    const EvolutionConfig& config);

// Dense materialization of the frozen linear operator
// L = gamma d1 + Psi0[eta*] T_{eta*} over the mean-zero real Fourier basis.
Eigen::MatrixXd frozen_linear_matrix(const PsiOperator& psi_star, const TEtaOperator& t_star,
                                     double gamma);

}  // namespace stokeswave
