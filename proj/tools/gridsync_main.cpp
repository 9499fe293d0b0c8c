#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gridsync/dynamics.hpp"
#include "gridsync/graph.hpp"
#include "gridsync/io.hpp"
#include "gridsync/kernels.hpp"
#include "gridsync/metrics.hpp"
#include "gridsync/optimizer.hpp"
#include "gridsync/rng.hpp"
#include "gridsync/sync_cert.hpp"

namespace gs = gridsync;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitUsage = 64;

struct CommonInput {
    std::string input_path;
    std::string convention = "admittance";
    double inertia = 1.0;
    double damping = 1.0;
    std::string out_dir = ".";
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gs::ParseError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

gs::PowerGraph load_graph(const CommonInput& ci) {
    std::string text = slurp(ci.input_path);
    if (ci.input_path.size() >= 5 &&
        ci.input_path.compare(ci.input_path.size() - 5, 5, ".json") == 0)
        return gs::parse_graph_json(text);
    gs::MatpowerOptions opts;
    opts.convention = ci.convention == "reactance"
                          ? gs::SusceptanceConvention::ReciprocalReactance
                          : gs::SusceptanceConvention::ImaginaryAdmittance;
    opts.inertia = ci.inertia;
    opts.damping = ci.damping;
    return gs::parse_matpower(text, opts);
}

void add_common(CLI::App* cmd, CommonInput& ci) {
    cmd->add_option("-i,--input", ci.input_path, "graph file (.json or MATPOWER .m)")
        ->required();
    cmd->add_option("--convention", ci.convention,
                    "susceptance convention for .m files: admittance | reactance")
        ->check(CLI::IsMember({"admittance", "reactance"}));
    cmd->add_option("--inertia", ci.inertia, "generator inertia (p.u. s^2)");
    cmd->add_option("--damping", ci.damping, "generator damping (p.u.)");
    cmd->add_option("-o,--out", ci.out_dir, "output directory");
}

void ensure_out(const std::string& dir) { fs::create_directories(dir); }

gs::CohesionSpec spec_for(const gs::PowerGraph& g, double gamma, double psi) {
    std::vector<std::pair<int, int>> pairs;
    for (const gs::Edge& e : g.edges()) pairs.emplace_back(e.i, e.j);
    return gs::CohesionSpec::make(gamma, psi, g.node_count(), pairs);
}

int cmd_reduce(const CommonInput& ci) {
    gs::PowerGraph g = load_graph(ci);
    gs::SymMatrix l = gs::build_laplacian(g);
    gs::SymMatrix l_red = gs::kron_reduce(l, g.generators());
    double r_tot = gs::total_effective_resistance_reduced(l, g.generators());
    ensure_out(ci.out_dir);

    std::string csv = "i,j,value\n";
    char buf[64];
    for (int i = 0; i < l_red.order(); ++i)
        for (int j = 0; j < l_red.order(); ++j) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", i, j, l_red(i, j));
            csv += buf;
        }
    gs::write_text_atomic(ci.out_dir + "/reduced_laplacian.csv", csv);

    std::ostringstream js;
    js.precision(17);
    js << "{\n  \"schema_version\": 1,\n  \"n\": " << g.node_count()
       << ",\n  \"k\": " << g.generator_count() << ",\n  \"edges\": " << g.edges().size()
       << ",\n  \"r_tot_reduced\": " << r_tot << ",\n  \"lambda2\": " << gs::lambda2(l)
       << "\n}\n";
    gs::write_text_atomic(ci.out_dir + "/reduce.json", js.str());
    std::printf("R_tot(G_red) = %.6f  (n = %d, k = %d, edges = %zu)\n", r_tot, g.node_count(),
                g.generator_count(), g.edges().size());
    return kExitOk;
}

int cmd_optimize(const CommonInput& ci, double alpha, double beta, double gamma, double psi,
                 bool have_cohesion, bool rewire) {
    gs::PowerGraph g = load_graph(ci);
    gs::DesignProblem prob(g);
    prob.alpha = alpha;
    prob.beta = beta;
    prob.allow_negative = rewire;
    if (have_cohesion || rewire) {
        if (!have_cohesion)
            throw gs::InvalidParameter("--rewire requires --gamma and --psi");
        prob.cohesion = spec_for(g, gamma, psi);
    }

    gs::OptimizationResult res = rewire          ? gs::solve_rewire(prob)
                                 : prob.cohesion ? gs::solve_p2(prob)
                                                 : gs::solve_p0(prob);
    ensure_out(ci.out_dir);
    gs::write_text_atomic(ci.out_dir + "/optimization.json", gs::optimization_json(res, prob));

    if (res.status == gs::OptimizationResult::Status::Infeasible) {
        std::fprintf(stderr, "infeasible: no design meets the cohesion constraint\n");
        return kExitInfeasible;
    }
    // optimized graph document
    auto cands = prob.resolved_candidates();
    gs::Vec w = g.weights();
    const auto& edges = g.edges();
    for (std::size_t e = 0; e < cands.size(); ++e)
        for (std::size_t l = 0; l < edges.size(); ++l)
            if (edges[l].i == cands[e].first && edges[l].j == cands[e].second)
                w[l] += res.x_star[e];
    gs::write_text_atomic(ci.out_dir + "/optimized_graph.json",
                          gs::serialize_graph(g.with_weights(w)));

    std::printf("R_tot(G_red(x*)) = %.6f  lambda2 = %.6f  budget_used = %.6f  iterations = %ld\n",
                res.r_tot_reduced, res.lambda2, res.budget_used, res.iterations);
    if (res.status == gs::OptimizationResult::Status::NotConverged) {
        std::fprintf(stderr, "solver did not reach the stationarity tolerance\n");
        return kExitNumerical;
    }
    return kExitOk;
}

int cmd_certify(const CommonInput& ci, double gamma, double psi, const std::string& p_file) {
    gs::PowerGraph g = load_graph(ci);
    gs::SymMatrix l = gs::build_laplacian(g);
    gs::CohesionSpec spec = spec_for(g, gamma, psi > 0.0 ? psi : 0.0);

    gs::Vec p(g.node_count(), 0.0);
    double p_norm = psi;
    if (!p_file.empty()) {
        p = gs::parse_vector_file(slurp(p_file));
        if (static_cast<int>(p.size()) != g.node_count())
            throw gs::ParseError("injection vector length mismatch");
        p_norm = gs::norm2(p);
    }

    std::vector<gs::Certificate> certs;
    certs.push_back(gs::exact_cohesion_check(l, p, spec));
    certs.push_back(gs::spectral_sufficient_check(l, p_norm, spec));
    certs.push_back(gs::conductance_sufficient_check(l, p_norm, spec));
    double tau = gs::lmi_threshold(spec);

    ensure_out(ci.out_dir);
    gs::write_text_atomic(ci.out_dir + "/certify.json",
                          gs::certificates_json(certs, gamma, psi));
    const char* names[] = {"exact", "spectral", "conductance"};
    for (std::size_t c = 0; c < certs.size(); ++c)
        std::printf("%-12s holds = %d  margin = %+.6e  threshold = %.6e\n", names[c],
                    certs[c].holds ? 1 : 0, certs[c].margin, certs[c].threshold);
    std::printf("lmi_threshold tau = %.6f  lambda2 = %.6f\n", tau, gs::lambda2(l));

    if (!p_file.empty()) {
        gs::SyncState st = gs::solve_sync_state(g, p);
        std::printf("sync state: incremental norm = %.6f rad (residual %.2e, %d iterations)\n",
                    st.incremental_norm, st.residual, st.iterations);
    }
    return kExitOk;
}

int cmd_simulate(const CommonInput& ci, const std::string& u0_file, double sigma,
                 std::uint64_t seed, gs::SimulationConfig cfg, bool linear) {
    gs::PowerGraph g = load_graph(ci);
    const int k = g.generator_count();
    gs::Vec u0(k, 0.0);
    if (!u0_file.empty()) {
        u0 = gs::parse_vector_file(slurp(u0_file));
        if (static_cast<int>(u0.size()) != k)
            throw gs::ParseError("u0 length must equal the generator count");
    } else if (sigma > 0.0) {
        gs::Rng rng(seed);
        for (double& v : u0) v = sigma*rng.next_normal();
    }
    gs::Vec p(g.node_count(), 0.0);

    gs::Trajectory traj;
    if (linear) {
        gs::SymMatrix l_red = gs::kron_reduce(gs::build_laplacian(g), g.generators());
        traj = gs::simulate_linear_reduced(l_red, g.inertia(), g.damping(), u0, cfg);
    } else {
        traj = gs::simulate_dae(g, p, u0, cfg);
    }
    double nt = gs::finite_horizon_l2(traj, gs::NormComponent::OmegaTilde);
    double nw = gs::finite_horizon_l2(traj, gs::NormComponent::Omega);

    ensure_out(ci.out_dir);
    gs::write_text_atomic(ci.out_dir + "/trajectory.csv", gs::trajectory_csv(traj));
    std::ostringstream js;
    js.precision(17);
    js << "{\n  \"schema_version\": 1,\n  \"norm_omega_tilde\": " << nt
       << ",\n  \"norm_omega\": " << nw << ",\n  \"dt\": " << cfg.dt
       << ",\n  \"horizon\": " << cfg.horizon << ",\n  \"seed\": " << seed << "\n}\n";
    gs::write_text_atomic(ci.out_dir + "/simulate.json", js.str());
    std::printf("norm_omega_tilde = %.8f  norm_omega = %.8f\n", nt, nw);
    return kExitOk;
}

int cmd_montecarlo(const CommonInput& ci, const std::vector<std::string>& inputs,
                   const std::vector<std::string>& names, int n_samples, double sigma,
                   std::uint64_t seed, gs::SimulationConfig cfg) {
    if (inputs.size() < 2)
        throw gs::InvalidParameter("need at least two graphs (reference first)");
    std::vector<std::pair<std::string, gs::PowerGraph>> variants;
    for (std::size_t v = 0; v < inputs.size(); ++v) {
        CommonInput vi = ci;
        vi.input_path = inputs[v];
        std::string name = v < names.size() ? names[v] : fs::path(inputs[v]).stem().string();
        variants.emplace_back(name, load_graph(vi));
    }
    gs::MonteCarloReport rep = gs::monte_carlo_compare(variants, n_samples, sigma, seed, cfg);
    ensure_out(ci.out_dir);
    gs::write_text_atomic(ci.out_dir + "/montecarlo.csv", gs::montecarlo_csv(rep));
    for (std::size_t v = 1; v < rep.variant_names.size(); ++v)
        std::printf("%s vs %s: mean reduction %.2f%% (omega: %.2f%%), win rate %.3f\n",
                    rep.variant_names[0].c_str(), rep.variant_names[v].c_str(),
                    rep.mean_reduction_pct[v], rep.mean_reduction_pct_omega[v],
                    rep.win_rate[v]);
    if (rep.excluded > 0)
        std::fprintf(stderr, "%d samples excluded after simulation failures\n", rep.excluded);
    return kExitOk;
}

int cmd_sweep(const CommonInput& ci, const std::vector<double>& gammas, double psi_step,
              double alpha, bool rewire) {
    gs::PowerGraph g = load_graph(ci);
    std::vector<std::pair<double, gs::PsiSweepResult>> sweeps;
    for (double gamma : gammas) {
        gs::DesignProblem prob(g);
        prob.alpha = alpha;
        prob.allow_negative = rewire;
        gs::PsiSweepResult sw = gs::max_feasible_psi(prob, gamma, psi_step);
        std::printf("gamma = %.6f: psi_max = %.3f, optimal value at psi_max = %.6f\n", gamma,
                    sw.psi_max, sw.value_at_psi_max);
        sweeps.emplace_back(gamma, std::move(sw));
    }
    ensure_out(ci.out_dir);
    gs::write_text_atomic(ci.out_dir + "/sweep.csv", gs::sweep_csv(sweeps));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridsync: network design for low-cost synchronization"};
    app.set_version_flag("--version", "gridsync 1.0.0");
    app.require_subcommand(1);

    CommonInput ci;

    auto* reduce = app.add_subcommand("reduce", "Kron reduction and total effective resistance");
    CommonInput ci_reduce;
    add_common(reduce, ci_reduce);

    auto* optimize = app.add_subcommand("optimize", "budget allocation (optionally constrained)");
    CommonInput ci_opt;
    add_common(optimize, ci_opt);
    double alpha = 0.0, beta = 1.0, gamma = 0.0, psi = -1.0;
    bool rewire = false;
    optimize->add_option("--alpha", alpha, "susceptance budget")->required();
    optimize->add_option("--beta", beta, "regularization parameter");
    optimize->add_option("--gamma", gamma, "cohesion arc length (rad)");
    optimize->add_option("--psi", psi, "injection ball radius (p.u.)");
    optimize->add_flag("--rewire", rewire, "relax sign constraint, conserve total weight");

    auto* certify = app.add_subcommand("certify", "synchronization certificates");
    CommonInput ci_cert;
    add_common(certify, ci_cert);
    double cert_gamma = 0.7853981633974483, cert_psi = 0.0;
    std::string p_file;
    certify->add_option("--gamma", cert_gamma, "cohesion arc length (rad)");
    certify->add_option("--psi", cert_psi, "injection ball radius (p.u.)");
    certify->add_option("--p-file", p_file, "explicit injection vector file");

    auto* simulate = app.add_subcommand("simulate", "swing-equation trajectory");
    CommonInput ci_sim;
    add_common(simulate, ci_sim);
    std::string u0_file;
    double sim_sigma = 0.0;
    std::uint64_t sim_seed = 1;
    gs::SimulationConfig sim_cfg;
    bool linear = false;
    std::string integrator = "rk4";
    simulate->add_option("--u0-file", u0_file, "step disturbance vector (one per generator)");
    simulate->add_option("--random-sigma", sim_sigma, "draw u0 ~ N(0, sigma^2 I)");
    simulate->add_option("--seed", sim_seed, "random seed");
    simulate->add_option("--dt", sim_cfg.dt, "step size (s)");
    simulate->add_option("--horizon", sim_cfg.horizon, "simulation horizon (s)");
    simulate->add_option("--integrator", integrator, "rk4 | trapezoid")
        ->check(CLI::IsMember({"rk4", "trapezoid"}));
    simulate->add_flag("--linear", linear, "reduced linear model instead of the DAE");

    auto* montecarlo = app.add_subcommand("montecarlo", "strategy comparison over random steps");
    CommonInput ci_mc;
    add_common(montecarlo, ci_mc);
    std::vector<std::string> mc_inputs, mc_names;
    int mc_n = 500;
    double mc_sigma = 1.0;
    std::uint64_t mc_seed = 1;
    gs::SimulationConfig mc_cfg;
    montecarlo->add_option("--variants", mc_inputs, "graph files, reference first")->required();
    montecarlo->add_option("--names", mc_names, "variant names");
    montecarlo->add_option("-N,--samples", mc_n, "sample count");
    montecarlo->add_option("--sigma", mc_sigma, "disturbance standard deviation");
    montecarlo->add_option("--seed", mc_seed, "random seed");
    montecarlo->add_option("--dt", mc_cfg.dt, "step size (s)");
    montecarlo->add_option("--horizon", mc_cfg.horizon, "horizon (s)");

    auto* sweep = app.add_subcommand("sweep", "feasible psi range and optimal values");
    CommonInput ci_sweep;
    add_common(sweep, ci_sweep);
    std::vector<double> gammas{0.7853981633974483};
    double psi_step = 1e-3, sweep_alpha = 0.0;
    bool sweep_rewire = true;
    sweep->add_option("--gamma-list", gammas, "gamma values (rad)");
    sweep->add_option("--psi-step", psi_step, "psi grid step");
    sweep->add_option("--alpha", sweep_alpha, "budget");
    sweep->add_flag("!--no-rewire", sweep_rewire, "constrain to nonnegative updates");

    // note: --input is per-subcommand; ci holds nothing at top level
    (void)ci;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (reduce->parsed()) return cmd_reduce(ci_reduce);
        if (optimize->parsed()) {
            bool have_cohesion = optimize->count("--gamma") > 0 && psi >= 0.0;
            return cmd_optimize(ci_opt, alpha, beta, gamma, psi, have_cohesion, rewire);
        }
        if (certify->parsed()) return cmd_certify(ci_cert, cert_gamma, cert_psi, p_file);
        if (simulate->parsed()) {
            sim_cfg.integrator = integrator == "trapezoid" ? gs::Integrator::ImplicitTrapezoid
                                                           : gs::Integrator::Rk4SemiExplicit;
            return cmd_simulate(ci_sim, u0_file, sim_sigma, sim_seed, sim_cfg, linear);
        }
        if (montecarlo->parsed())
            return cmd_montecarlo(ci_mc, mc_inputs, mc_names, mc_n, mc_sigma, mc_seed, mc_cfg);
        if (sweep->parsed())
            return cmd_sweep(ci_sweep, gammas, psi_step, sweep_alpha, sweep_rewire);
    } catch (const gs::ParseError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const gs::InvalidBranch& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const gs::DisconnectedGraph& e) {
        std::fprintf(stderr, "graph error: %s\n", e.what());
        return kExitInput;
    } catch (const gs::InvalidBoundary& e) {
        std::fprintf(stderr, "graph error: %s\n", e.what());
        return kExitInput;
    } catch (const gs::UnbalancedInjection& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const gs::InvalidParameter& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const gs::NumericalFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const gs::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitUsage;
}
