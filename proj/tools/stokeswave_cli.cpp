// stokeswave: steady surfaces, traveling waves, free-boundary Stokes
// evolution, and operator property verification from one config-driven CLI.
//
// Subcommands: steady, travel, evolve, verify. Options can be given on the
// command line or in an INI-style config (--config), sections per
// subcommand; unknown keys are rejected.

#include <CLI11.hpp>

#include <filesystem>
#include <map>
#include <random>
#include <sstream>

#include "stokeswave/evolution.hpp"
#include "stokeswave/io.hpp"
#include "stokeswave/nsnd.hpp"
#include "stokeswave/traveling.hpp"
#include "stokeswave/util.hpp"

using namespace stokeswave;
namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
    std::string out = "out";
    int threads = 1;
    unsigned long long seed = 0;
    std::string log_level = "warn";
};

struct PhysicsOpts {
    int nx = 32;
    int nz = 16;
    double b = 1.0;
    double g = 1.0;
    double sigma = 1.0;
    std::string phi = "cos1:0.3";
};

// "const:c", "cosN:amp", "sinN:amp", "random:amp", joined with '+'.
SurfaceField parse_field_spec(const std::string& spec, const GridSpec& grid,
                              unsigned long long seed) {
    SurfaceField out(grid);
    std::stringstream ss(spec);
    std::string term;
    while (std::getline(ss, term, '+')) {
        if (term.empty()) continue;
        auto colon = term.find(':');
        if (colon == std::string::npos)
            throw ConfigError("field spec term '" + term + "' is missing ':'");
        std::string head = term.substr(0, colon);
        double amp = 0.0;
        try {
            amp = std::stod(term.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("field spec term '" + term + "' has a malformed amplitude");
        }
        if (head == "const") {
            out += SurfaceField::constant(grid, amp);
        } else if (head == "random") {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> gauss;
            SurfaceField r(grid);
            for (int k = 1; k <= std::min(8, grid.Nx / 2 - 1); ++k) {
                Complex c(std::exp(-0.8 * k) * gauss(rng), std::exp(-0.8 * k) * gauss(rng));
                r.set_coeff(k, c);
                r.set_coeff(-k, std::conj(c));
            }
            double scale = r.max_abs();
            if (scale > 0) r *= amp / scale;
            out += r;
        } else if (head.rfind("cos", 0) == 0 || head.rfind("sin", 0) == 0) {
            int k = 0;
            try {
                k = std::stoi(head.substr(3));
            } catch (const std::exception&) {
                throw ConfigError("field spec term '" + term + "' has a malformed mode number");
            }
            if (k < 1 || k > grid.Nx / 2 - 1)
                throw ConfigError("field spec mode " + std::to_string(k) +
                                  " is out of the resolved range");
            out += (head[0] == 'c') ? SurfaceField::cosine(grid, k, amp)
                                    : SurfaceField::sine(grid, k, amp);
        } else {
            throw ConfigError("unknown field spec term '" + term + "'");
        }
    }
    return out;
}

JsonValue field_json(const SurfaceField& u) {
    JsonValue j = JsonValue::object();
    std::vector<double> re, im;
    for (int i = 0; i < u.size(); ++i) {
        re.push_back(u.raw()[i].real());
        im.push_back(u.raw()[i].imag());
    }
    j.set("coeff_re", JsonValue::from_doubles(re));
    j.set("coeff_im", JsonValue::from_doubles(im));
    Eigen::VectorXd v = u.values();
    j.set("values", JsonValue::from_doubles(std::vector<double>(v.data(), v.data() + v.size())));
    return j;
}

std::string config_echo_lines(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    if (!out.empty()) out.pop_back();
    return out;
}

JsonValue config_echo_json(const std::vector<std::pair<std::string, std::string>>& kv) {
    JsonValue j = JsonValue::object();
    for (const auto& [k, v] : kv) j.set(k, v);
    return j;
}

GridSpec make_grid(const PhysicsOpts& ph) {
    GridSpec grid{1, ph.nx, ph.nz, ph.b, 2.0 * M_PI};
    grid.validate();
    return grid;
}

CapGravParams make_params(const PhysicsOpts& ph) {
    CapGravParams p{ph.g, ph.sigma, ph.b};
    p.validate();
    return p;
}

void check_phi_admissible(const SurfaceField& phi, const CapGravParams& params) {
    double m = min_oversampled(-1.0 * phi, 4);
    if (!(m > -params.g * params.b))
        throw DepthPreconditionViolated("phi is inadmissible: min(-phi) = " + std::to_string(m) +
                                        " must exceed -g b = " +
                                        std::to_string(-params.g * params.b));
}

// ------------------------------------------------------------------ steady
int cmd_steady(const GlobalOpts& go, const PhysicsOpts& ph, double tol) {
    GridSpec grid = make_grid(ph);
    CapGravParams params = make_params(ph);
    SurfaceField phi = parse_field_spec(ph.phi, grid, go.seed);
    check_phi_admissible(phi, params);

    NewtonTrace trace;
    SurfaceField eta = capgrav_solve(phi, params, tol, &trace);
    SurfaceField res = capgrav_apply(eta, params) + phi;

    std::vector<std::pair<std::string, std::string>> kv = {
        {"command", "steady"},        {"nx", std::to_string(ph.nx)},
        {"nz", std::to_string(ph.nz)}, {"b", format_double(ph.b)},
        {"g", format_double(ph.g)},   {"sigma", format_double(ph.sigma)},
        {"phi", ph.phi},              {"tol", format_double(tol)},
        {"seed", std::to_string(go.seed)}};
    JsonValue j = JsonValue::object();
    j.set("format", kFormatVersion);
    j.set("config", config_echo_json(kv));
    j.set("eta_star", field_json(eta));
    JsonValue nt = JsonValue::object();
    nt.set("iterations", trace.iterations);
    nt.set("residuals", JsonValue::from_doubles(trace.residuals));
    nt.set("converged", trace.converged);
    j.set("newton", nt);
    j.set("residual_h32", sobolev_norm(res, 1.5));
    j.set("min_depth", min_oversampled(eta, 4) + params.b);
    write_text_file(go.out + "/steady_result.json", j.dump());
    std::printf("steady: converged in %d Newton steps, residual %.3e\n", trace.iterations,
                sobolev_norm(res, 1.5));
    return 0;
}

// ------------------------------------------------------------------ travel
int cmd_travel(const GlobalOpts& go, const PhysicsOpts& ph, const std::string& model_name,
               std::vector<double> gammas, double tol, int max_iter) {
    GridSpec grid = make_grid(ph);
    CapGravParams params = make_params(ph);
    SurfaceField phi = parse_field_spec(ph.phi, grid, go.seed);
    check_phi_admissible(phi, params);
    WaveModel model;
    if (model_name == "stokes")
        model = WaveModel::Stokes;
    else if (model_name == "navier-stokes")
        model = WaveModel::NavierStokes;
    else
        throw ConfigError("model must be 'stokes' or 'navier-stokes', got '" + model_name + "'");

    TravelingWaveProblem problem(phi, params, std::min(tol, 1e-11));

    // sweep: parallel at the job level, results merged by index
    std::vector<TravelingWaveResult> results(gammas.size());
    parallel_for(static_cast<int>(gammas.size()), go.threads, [&](int i) {
        try {
            results[i] = (model == WaveModel::Stokes)
                             ? solve_traveling_stokes(problem, gammas[i], tol, max_iter)
                             : solve_traveling_ns(problem, gammas[i], tol, max_iter);
        } catch (const Error& e) {
            results[i].gamma = gammas[i];
            results[i].eta_star = problem.eta_star();
            results[i].failure = e.what();
        }
    });

    std::vector<std::pair<std::string, std::string>> kv = {
        {"command", "travel"},         {"model", model_name},
        {"nx", std::to_string(ph.nx)}, {"nz", std::to_string(ph.nz)},
        {"b", format_double(ph.b)},    {"g", format_double(ph.g)},
        {"sigma", format_double(ph.sigma)}, {"phi", ph.phi},
        {"tol", format_double(tol)},   {"max_iter", std::to_string(max_iter)},
        {"seed", std::to_string(go.seed)}, {"threads", std::to_string(go.threads)}};

    double frontier = 0.0;
    JsonValue arr = JsonValue::array();
    for (const auto& r : results) {
        if (r.converged) frontier = std::max(frontier, std::abs(r.gamma));
        JsonValue o = JsonValue::object();
        o.set("gamma", r.gamma);
        o.set("converged", r.converged);
        o.set("iterations", r.iterations);
        o.set("fixed_point_defect", r.fixed_point_defect);
        o.set("residual", r.residual);
        o.set("contraction_ratios", JsonValue::from_doubles(r.contraction_ratios));
        o.set("mean_history", JsonValue::from_doubles(r.mean_history));
        o.set("projected_mass", JsonValue::from_doubles(r.projected_mass));
        if (!r.failure.empty()) o.set("failure", r.failure);
        o.set("eta_w", field_json(r.eta_w()));
        arr.push(std::move(o));
    }
    // reflection defect of +-gamma pairs with even phi
    JsonValue pairs = JsonValue::array();
    for (size_t i = 0; i < results.size(); ++i)
        for (size_t j2 = i + 1; j2 < results.size(); ++j2) {
            if (std::abs(results[i].gamma + results[j2].gamma) > 1e-15) continue;
            if (!results[i].converged || !results[j2].converged) continue;
            SurfaceField wi = results[i].eta_w(), wj = results[j2].eta_w();
            SurfaceField wr(grid);
            for (int k = -grid.Nx / 2 + 1; k < grid.Nx / 2; ++k)
                wr.set_coeff(k, std::conj(wj.coeff(k)));
            wr.enforce_real();
            JsonValue o = JsonValue::object();
            o.set("gamma", std::abs(results[i].gamma));
            o.set("defect", sobolev_norm(wi - wr, 0.0));
            pairs.push(std::move(o));
        }

    JsonValue j = JsonValue::object();
    j.set("format", kFormatVersion);
    j.set("config", config_echo_json(kv));
    j.set("gamma_frontier", frontier);
    j.set("results", std::move(arr));
    j.set("reflection_pairs", std::move(pairs));
    write_text_file(go.out + "/travel_result.json", j.dump());

    std::vector<std::string> cols = {"x"};
    for (const auto& r : results) cols.push_back("eta_" + format_double(r.gamma));
    CsvWriter csv(cols, config_echo_lines(kv));
    Eigen::VectorXd xs = grid.x_points();
    std::vector<Eigen::VectorXd> profiles;
    for (const auto& r : results) profiles.push_back(r.eta_w().values());
    for (int i = 0; i < grid.Nx; ++i) {
        std::vector<double> row = {xs[i]};
        for (const auto& p : profiles) row.push_back(p[i]);
        csv.add_row(row);
    }
    write_text_file(go.out + "/travel_profiles.csv", csv.str());

    int failed = 0;
    for (const auto& r : results) {
        std::printf("travel: gamma=%+.6g  %s  iters=%d  residual=%.3e%s%s\n", r.gamma,
                    r.converged ? "converged" : "FAILED", r.iterations, r.residual,
                    r.failure.empty() ? "" : "  ", r.failure.c_str());
        if (!r.converged) ++failed;
    }
    std::printf("travel: gamma frontier %.6g\n", frontier);
    return failed == static_cast<int>(results.size()) && !results.empty() ? 3 : 0;
}

// ------------------------------------------------------------------ evolve
int cmd_evolve(const GlobalOpts& go, const PhysicsOpts& ph, const std::string& init,
               const std::string& perturb, double gamma, double dt, double t_final, double eps,
               const std::string& scheme_name, int record_every, double tol) {
    GridSpec grid = make_grid(ph);
    CapGravParams params = make_params(ph);
    SurfaceField phi = parse_field_spec(ph.phi, grid, go.seed);
    check_phi_admissible(phi, params);

    EvolutionConfig cfg;
    cfg.dt = dt;
    cfg.t_final = t_final;
    cfg.epsilon = eps;
    cfg.record_every = record_every;
    cfg.gamma = gamma;
    if (scheme_name == "rk4_explicit")
        cfg.scheme = Scheme::Rk4Explicit;
    else if (scheme_name == "imex_frozen")
        cfg.scheme = Scheme::ImexFrozen;
    else
        throw ConfigError("scheme must be rk4_explicit or imex_frozen, got '" + scheme_name + "'");
    cfg.validate();

    SurfaceField eta0(grid);
    SurfaceField reference(grid);
    bool experiment = false;
    if (init == "steady") {
        reference = capgrav_solve(phi, params, std::min(tol, 1e-11));
        eta0 = reference;
    } else if (init == "wave" || init == "wave+perturbation") {
        TravelingWaveProblem problem(phi, params, std::min(tol, 1e-11));
        TravelingWaveResult w = solve_traveling_stokes(problem, gamma, tol);
        if (!w.converged) throw NoContraction("evolve: traveling-wave solve failed: " + w.failure);
        reference = w.eta_w();
        eta0 = reference;
        experiment = (init == "wave+perturbation");
    } else {
        std::string spec = init.rfind("coeffs:", 0) == 0 ? init.substr(7) : init;
        eta0 = parse_field_spec(spec, grid, go.seed);
        reference = eta0;
    }

    EvolutionTrace trace;
    if (experiment) {
        SurfaceField f0 = parse_field_spec(perturb, grid, go.seed);
        trace = stability_experiment(reference, phi, params, project_mean_zero(f0), cfg);
    } else {
        trace = evolve(eta0, phi, params, cfg, &reference);
    }

    std::vector<std::pair<std::string, std::string>> kv = {
        {"command", "evolve"},         {"init", init},
        {"perturb", perturb},          {"gamma", format_double(gamma)},
        {"nx", std::to_string(ph.nx)}, {"nz", std::to_string(ph.nz)},
        {"b", format_double(ph.b)},    {"g", format_double(ph.g)},
        {"sigma", format_double(ph.sigma)}, {"phi", ph.phi},
        {"dt", format_double(dt)},     {"t_final", format_double(t_final)},
        {"epsilon", format_double(eps)}, {"scheme", scheme_name},
        {"record_every", std::to_string(record_every)}, {"seed", std::to_string(go.seed)}};

    CsvWriter csv({"t", "norm_hs1", "energy", "mean_eta", "min_depth"}, config_echo_lines(kv));
    for (size_t i = 0; i < trace.times.size(); ++i)
        csv.add_row({trace.times[i], trace.norms_hs1[i], trace.energies[i], trace.means[i],
                     trace.min_depths[i]});
    write_text_file(go.out + "/evolve_trace.csv", csv.str());

    std::vector<std::string> pcols = {"x"};
    for (double t : trace.times) pcols.push_back("eta_t" + format_double(t));
    CsvWriter pcsv(pcols, config_echo_lines(kv));
    Eigen::VectorXd xs = grid.x_points();
    for (int i = 0; i < grid.Nx; ++i) {
        std::vector<double> row = {xs[i]};
        for (const auto& s : trace.states) row.push_back(s.values()[i]);
        pcsv.add_row(row);
    }
    write_text_file(go.out + "/evolve_profiles.csv", pcsv.str());

    JsonValue j = JsonValue::object();
    j.set("format", kFormatVersion);
    j.set("config", config_echo_json(kv));
    j.set("status", trace.status == EvolveStatus::Completed      ? "completed"
                    : trace.status == EvolveStatus::StepRejected ? "step_rejected"
                                                                 : "depth_violation");
    if (!trace.note.empty()) j.set("note", trace.note);
    j.set("final_state", field_json(trace.states.back()));
    if (trace.decay_fit) {
        JsonValue f = JsonValue::object();
        f.set("c0", trace.decay_fit->c0);
        f.set("m2", trace.decay_fit->m2);
        f.set("fit_residual", trace.decay_fit->fit_residual);
        f.set("t_begin", trace.decay_fit->t_begin);
        f.set("t_end", trace.decay_fit->t_end);
        f.set("energy_nonincreasing_tail", trace.energy_nonincreasing_tail);
        j.set("decay_fit", f);
        JsonValue df = JsonValue::object();
        df.set("format", kFormatVersion);
        df.set("config", config_echo_json(kv));
        df.set("decay_fit", f);
        write_text_file(go.out + "/decay_fit.json", df.dump());
    }
    write_text_file(go.out + "/evolve_result.json", j.dump());

    if (trace.status != EvolveStatus::Completed) {
        std::printf("evolve: halted (%s); partial trace flushed\n", trace.note.c_str());
        return 3;
    }
    std::printf("evolve: completed T=%.6g, %zu records\n", t_final, trace.times.size());
    if (trace.decay_fit)
        std::printf("evolve: decay fit c0=%.6g (fit residual %.3g)\n", trace.decay_fit->c0,
                    trace.decay_fit->fit_residual);
    return 0;
}

// ------------------------------------------------------------------ verify
struct SuiteResult {
    bool pass = false;
    JsonValue measured = JsonValue::object();
};

int cmd_verify(const GlobalOpts& go, const PhysicsOpts& ph, const std::string& suites_csv,
               const std::string& eta_spec) {
    GridSpec grid = make_grid(ph);
    SurfaceField eta = parse_field_spec(eta_spec, grid, go.seed);
    auto geom = std::make_shared<FlatteningGeometry>(build_geometry(eta, grid));
    auto geom_flat = std::make_shared<FlatteningGeometry>(build_geometry(SurfaceField(grid), grid));

    std::vector<std::string> suites;
    std::stringstream ss(suites_csv);
    std::string s;
    while (std::getline(ss, s, ',')) suites.push_back(s);

    std::map<std::string, SuiteResult> report;
    for (const std::string& suite : suites) {
        SuiteResult r;
        if (suite == "flat-symbol") {
            // the flat operator must act mode-diagonally with the symbol sign
            PsiOperator psi(geom_flat, 0.0);
            double worst_offdiag = 0.0, worst_sign = -1e300;
            for (int k = 1; k <= std::min(8, grid.Nx / 3); ++k) {
                SurfaceField out = psi_apply(psi, SurfaceField::cosine(grid, k, 1.0));
                for (int kk = 0; kk <= grid.Nx / 2 - 1; ++kk)
                    if (kk != k)
                        worst_offdiag = std::max(worst_offdiag, std::abs(out.coeff(kk)));
                worst_sign = std::max(worst_sign, 2.0 * out.coeff(k).real());
            }
            r.measured.set("max_offdiagonal", worst_offdiag);
            r.measured.set("max_symbol", worst_sign);
            r.pass = worst_offdiag < 1e-8 && worst_sign < 0.0;
        } else if (suite == "self-adjoint") {
            PsiOperator psi(geom, 0.0);
            Eigen::MatrixXd M = psi_matrix(psi, 2 * (grid.Nx / 3), go.threads);
            double asym = (M - M.transpose()).norm() / M.norm();
            r.measured.set("relative_asymmetry", asym);
            r.pass = asym < 1e-9;
        } else if (suite == "coercivity") {
            PsiOperator psi(geom, 0.0);
            Eigen::MatrixXd M = psi_matrix(psi, 2 * (grid.Nx / 3), go.threads);
            double c = coercivity_constant(M, grid);
            r.measured.set("c_psi", c);
            r.pass = c > 0.0;
        } else if (suite == "commutator") {
            PsiOperator psi(geom, 0.0);
            SurfaceField chi =
                SurfaceField::cosine(grid, 2, 1.0) + SurfaceField::sine(grid, 3, 0.5);
            double d = commutator_defect(psi, chi, 1);
            r.measured.set("defect", d);
            double dn = commutator_defect_eta_normalized(psi, chi, 1);
            if (std::isfinite(dn)) r.measured.set("eta_normalized", dn);
            r.pass = geom->is_flat() ? d < 1e-10 : std::isfinite(d);
        } else if (suite == "contraction") {
            SurfaceField w = SurfaceField::cosine(grid, 2, 1.0);
            SurfaceField chi = SurfaceField::cosine(grid, 1, 1.0);
            auto quot = [&](double t) {
                auto g2 = std::make_shared<FlatteningGeometry>(build_geometry(eta + t * w, grid));
                PsiOperator pa(geom, 0.0), pb(g2, 0.0);
                return sobolev_norm(psi_apply(pa, chi) - psi_apply(pb, chi), 0.0) / t;
            };
            double q1 = quot(1e-2), q2 = quot(1e-3), q3 = quot(1e-4);
            r.measured.set("quotients", JsonValue::from_doubles({q1, q2, q3}));
            r.pass = std::isfinite(q3) && std::abs(q1 - q2) < 0.1 * std::abs(q2) &&
                     std::abs(q2 - q3) < 0.1 * std::abs(q3);
        } else if (suite == "isomorphism") {
            PsiOperator psi(geom, 0.0);
            std::mt19937_64 rng(go.seed + 17);
            std::normal_distribution<double> gauss;
            double worst = 0.0;
            for (int trial = 0; trial < 5; ++trial) {
                SurfaceField chi(grid);
                for (int k = 1; k <= 6; ++k) {
                    Complex c(std::exp(-0.5 * k) * gauss(rng), std::exp(-0.5 * k) * gauss(rng));
                    chi.set_coeff(k, c);
                    chi.set_coeff(-k, std::conj(c));
                }
                SurfaceField back = psi_inverse_apply(psi, psi_apply(psi, chi));
                worst =
                    std::max(worst, sobolev_norm(back - chi, 0.0) / sobolev_norm(chi, 0.0));
            }
            r.measured.set("max_roundtrip_error", worst);
            r.pass = worst < 1e-7;
        } else {
            throw ConfigError("unknown verify suite '" + suite + "'");
        }
        report[suite] = std::move(r);
    }

    std::vector<std::pair<std::string, std::string>> kv = {
        {"command", "verify"},         {"suites", suites_csv},
        {"eta", eta_spec},             {"nx", std::to_string(ph.nx)},
        {"nz", std::to_string(ph.nz)}, {"b", format_double(ph.b)},
        {"seed", std::to_string(go.seed)}, {"threads", std::to_string(go.threads)}};
    JsonValue j = JsonValue::object();
    j.set("format", kFormatVersion);
    j.set("config", config_echo_json(kv));
    bool all = true;
    JsonValue suites_json = JsonValue::object();
    for (auto& [name, res] : report) {
        JsonValue o = JsonValue::object();
        o.set("pass", res.pass);
        o.set("measured", res.measured);
        suites_json.set(name, std::move(o));
        std::printf("verify: %-14s %s\n", name.c_str(), res.pass ? "PASS" : "FAIL");
        all = all && res.pass;
    }
    j.set("suites", std::move(suites_json));
    j.set("all_pass", all);
    write_text_file(go.out + "/verify_report.json", j.dump());
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral free-boundary Stokes traveling-wave solver"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "INI config file (sections per subcommand)");

    GlobalOpts go;
    app.add_option("--out", go.out, "Output directory");
    app.add_option("--threads", go.threads, "Worker pool size for sweeps");
    app.add_option("--seed", go.seed, "Random seed for perturbations");
    app.add_option("--log-level", go.log_level, "error|warn|info|debug");

    PhysicsOpts ph;
    double tol = 1e-10;
    auto add_physics = [&](CLI::App* sub) {
        sub->add_option("--nx", ph.nx, "Fourier modes (even, >= 8)");
        sub->add_option("--nz", ph.nz, "Chebyshev points (>= 8)");
        sub->add_option("--b", ph.b, "Strip depth");
        sub->add_option("--g", ph.g, "Gravity");
        sub->add_option("--sigma", ph.sigma, "Surface tension");
        sub->add_option("--phi", ph.phi,
                        "Stress profile spec (const:c | cosN:a | sinN:a, '+'-joined)");
        sub->add_option("--tol", tol, "Solver tolerance");
    };

    CLI::App* steady = app.add_subcommand("steady", "Solve g eta + sigma H(eta) = -phi");
    add_physics(steady);

    CLI::App* travel = app.add_subcommand("travel", "Traveling-wave sweep over gamma");
    add_physics(travel);
    std::string model = "stokes";
    std::vector<double> gammas = {0.0};
    int max_iter = 60;
    travel->add_option("--model", model, "stokes | navier-stokes");
    travel->add_option("--gamma-list", gammas, "Wave speeds")->delimiter(',');
    travel->add_option("--max-iter", max_iter, "Fixed-point iteration cap");

    CLI::App* evolve_cmd = app.add_subcommand("evolve", "Time integration of the dynamic flow");
    add_physics(evolve_cmd);
    std::string init = "steady", perturb = "cos1:0.001", scheme = "rk4_explicit";
    double gamma = 0.0, dt = 1e-3, t_final = 1.0, eps = 0.0;
    int record_every = 10;
    evolve_cmd->add_option("--init", init, "steady | wave | wave+perturbation | field spec");
    evolve_cmd->add_option("--perturb", perturb, "Perturbation spec (incl. random:amp)");
    evolve_cmd->add_option("--gamma", gamma, "Frame speed");
    evolve_cmd->add_option("--dt", dt, "Timestep");
    evolve_cmd->add_option("--t-final", t_final, "Horizon");
    evolve_cmd->add_option("--epsilon", eps, "Viscosity of the regularized flow");
    evolve_cmd->add_option("--scheme", scheme, "rk4_explicit | imex_frozen");
    evolve_cmd->add_option("--record-every", record_every, "Recording stride");

    CLI::App* verify = app.add_subcommand("verify", "Operator property suites");
    add_physics(verify);
    std::string suites = "flat-symbol,self-adjoint,coercivity,commutator,contraction,isomorphism";
    std::string eta_spec = "cos1:0.4";
    verify->add_option("--suites", suites, "Comma-separated suite list");
    verify->add_option("--eta", eta_spec, "Surface spec for the curved suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (go.log_level == "error")
        log_level() = LogLevel::Error;
    else if (go.log_level == "warn")
        log_level() = LogLevel::Warn;
    else if (go.log_level == "info")
        log_level() = LogLevel::Info;
    else if (go.log_level == "debug")
        log_level() = LogLevel::Debug;
    else {
        std::fprintf(stderr, "error: unknown log level '%s'\n", go.log_level.c_str());
        return 2;
    }

    try {
        fs::create_directories(go.out);
        if (steady->parsed()) return cmd_steady(go, ph, tol);
        if (travel->parsed()) return cmd_travel(go, ph, model, gammas, tol, max_iter);
        if (evolve_cmd->parsed())
            return cmd_evolve(go, ph, init, perturb, gamma, dt, t_final, eps, scheme,
                              record_every, tol);
        if (verify->parsed()) return cmd_verify(go, ph, suites, eta_spec);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const DepthPreconditionViolated& e) {
        std::fprintf(stderr, "error (precondition): %s\n", e.what());
        return 2;
    } catch (const DepthViolation& e) {
        std::fprintf(stderr, "error (precondition): %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error (solver): %s\n", e.what());
        return 3;
    }
    return 2;
}
