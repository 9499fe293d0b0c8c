#include "gridsync/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "gridsync/kernels.hpp"
#include "gridsync/rng.hpp"
#include "gridsync/sync_cert.hpp"

namespace gridsync {

namespace {

void validate_config(const SimulationConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw InvalidParameter("dt must be positive");
    if (!(cfg.horizon >= cfg.dt)) throw InvalidParameter("horizon must cover one step");
    if (!(cfg.newton_tol <= 1e-8)) throw InvalidParameter("newton_tol must be <= 1e-8");
    if (cfg.newton_max_iter < 1) throw InvalidParameter("newton_max_iter must be >= 1");
}

void validate_balance(const Vec& p) {
    double scale = std::max(1.0, norm_inf(p));
    if (std::abs(sum(p)) > 1e-9*scale)
        throw UnbalancedInjection("injections must sum to zero");
}

// Precomputed indexing for the swing DAE on one graph.
struct DaeSystem {
    const PowerGraph& g;
    int n, k, nl;
    std::vector<int> gens, loads;
    std::vector<int> node_role;   // >=0: generator slot; <0: ~load slot
    Vec p_load;

    DaeSystem(const PowerGraph& graph, const Vec& p) : g(graph) {
        n = g.node_count();
        gens = g.generators();
        loads = g.loads();
        k = static_cast<int>(gens.size());
        nl = static_cast<int>(loads.size());
        node_role.assign(n, 0);
        for (int a = 0; a < k; ++a) node_role[gens[a]] = a;
        for (int b = 0; b < nl; ++b) node_role[loads[b]] = ~b;
        p_load.resize(nl);
        for (int b = 0; b < nl; ++b) p_load[b] = p[loads[b]];
    }

    void fill_full(const Vec& delta_gen, const Vec& delta_load, Vec& full) const {
        for (int a = 0; a < k; ++a) full[gens[a]] = delta_gen[a];
        for (int b = 0; b < nl; ++b) full[loads[b]] = delta_load[b];
    }

    // net flow out of every node
    void flows(const Vec& full, Vec& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (const Edge& e : g.edges()) {
            double f = e.weight*std::sin(full[e.i] - full[e.j]);
            out[e.i] += f;
            out[e.j] -= f;
        }
    }

    // Newton on the load angles; returns iterations used, -1 on failure
    int solve_loads(const Vec& delta_gen, Vec& delta_load, double tol, int max_iter) const {
        if (nl == 0) return 0;
        Vec full(n), fl(n), r(nl);
        for (int it = 0; it < max_iter; ++it) {
            fill_full(delta_gen, delta_load, full);
            flows(full, fl);
            for (int b = 0; b < nl; ++b) r[b] = p_load[b] - fl[loads[b]];
            if (norm_inf(r) <= tol) return it;

            SymMatrix jac(nl);
            for (const Edge& e : g.edges()) {
                int ri = node_role[e.i], rj = node_role[e.j];
                bool il = ri < 0, jl = rj < 0;
                if (!il && !jl) continue;
                double w = e.weight*std::cos(full[e.i] - full[e.j]);
                if (il) jac.add(~ri, ~ri, w);
                if (jl) jac.add(~rj, ~rj, w);
                if (il && jl) jac.add(~ri, ~rj, -w);
            }
            Vec step;
            Cholesky cf = cholesky(jac);
            if (cf.ok) {
                step = cf.solve(r);
            } else {
                Lu lf = lu_factor(jac.dense());
                if (!lf.ok) return -1;
                step = r;
                lf.solve_in_place(step);
            }
            axpy(1.0, step, delta_load);
        }
        // final residual check
        fill_full(delta_gen, delta_load, full);
        flows(full, fl);
        for (int b = 0; b < nl; ++b) r[b] = p_load[b] - fl[loads[b]];
        return norm_inf(r) <= tol ? max_iter : -1;
    }
};

std::uint64_t fnv1a_hash(const Vec& v) {
    std::uint64_t h = 1469598103934665603ull;
    for (double d : v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(d));
        std::memcpy(&bits, &d, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8*b)) & 0xffull;
            h *= 1099511628211ull;
        }
    }
    return h;
}

Trajectory run_rk4(const DaeSystem& sys, const Vec& p, const Vec& u0,
                   const SimulationConfig& cfg) {
    const int k = sys.k, n = sys.n;
    const double m = sys.g.inertia(), d = sys.g.damping();
    const double h = cfg.dt;
    const int steps = static_cast<int>(std::llround(cfg.horizon/h));

    Vec p_gen(k);
    for (int a = 0; a < k; ++a) p_gen[a] = p[sys.gens[a]] + u0[a];

    Trajectory traj;
    traj.times.resize(steps + 1);
    traj.delta_gen = Matrix(steps + 1, k);
    traj.omega_gen = Matrix(steps + 1, k);
    traj.delta_load = Matrix(steps + 1, sys.nl);
    traj.converged.assign(steps + 1, 1);

    Vec dg(k, 0.0), og(k, 0.0), dl(sys.nl, 0.0);
    Vec full(n), fl(n);
    Vec warm = dl;

    // stage derivative evaluation at (dg, og); warm holds the load solution
    auto eval = [&](const Vec& dgs, const Vec& ogs, Vec& ddot, Vec& odot, double at) {
        if (sys.solve_loads(dgs, warm, cfg.newton_tol, cfg.newton_max_iter) < 0)
            throw AlgebraicSolveFailure("load power balance Newton diverged", at);
        sys.fill_full(dgs, warm, full);
        sys.flows(full, fl);
        for (int a = 0; a < k; ++a) {
            ddot[a] = ogs[a];
            odot[a] = (p_gen[a] - d*ogs[a] - fl[sys.gens[a]])/m;
        }
    };

    Vec k1d(k), k1o(k), k2d(k), k2o(k), k3d(k), k3o(k), k4d(k), k4o(k);
    Vec td(k), to(k);
    for (int s = 0; s <= steps; ++s) {
        double t = s*h;
        traj.times[s] = t;
        // store the state with a consistent load solve
        if (sys.solve_loads(dg, dl, cfg.newton_tol, cfg.newton_max_iter) < 0)
            throw AlgebraicSolveFailure("load power balance Newton diverged", t);
        for (int a = 0; a < k; ++a) {
            traj.delta_gen(s, a) = dg[a];
            traj.omega_gen(s, a) = og[a];
        }
        for (int b = 0; b < sys.nl; ++b) traj.delta_load(s, b) = dl[b];
        if (s == steps) break;

        warm = dl;
        eval(dg, og, k1d, k1o, t);
        for (int a = 0; a < k; ++a) {
            td[a] = dg[a] + 0.5*h*k1d[a];
            to[a] = og[a] + 0.5*h*k1o[a];
        }
        eval(td, to, k2d, k2o, t + 0.5*h);
        for (int a = 0; a < k; ++a) {
            td[a] = dg[a] + 0.5*h*k2d[a];
            to[a] = og[a] + 0.5*h*k2o[a];
        }
        eval(td, to, k3d, k3o, t + 0.5*h);
        for (int a = 0; a < k; ++a) {
            td[a] = dg[a] + h*k3d[a];
            to[a] = og[a] + h*k3o[a];
        }
        eval(td, to, k4d, k4o, t + h);
        for (int a = 0; a < k; ++a) {
            dg[a] += h/6.0*(k1d[a] + 2.0*k2d[a] + 2.0*k3d[a] + k4d[a]);
            og[a] += h/6.0*(k1o[a] + 2.0*k2o[a] + 2.0*k3o[a] + k4o[a]);
        }
        dl = warm;  // warm start for the consistency solve at s+1
    }
    return traj;
}

Trajectory run_trapezoid(const DaeSystem& sys, const Vec& p, const Vec& u0,
                         const SimulationConfig& cfg) {
    const int k = sys.k, n = sys.n, nl = sys.nl;
    const double m = sys.g.inertia(), d = sys.g.damping();
    const double h = cfg.dt;
    const int steps = static_cast<int>(std::llround(cfg.horizon/h));
    const int dim = 2*k + nl;

    Vec p_gen(k);
    for (int a = 0; a < k; ++a) p_gen[a] = p[sys.gens[a]] + u0[a];

    Trajectory traj;
    traj.times.resize(steps + 1);
    traj.delta_gen = Matrix(steps + 1, k);
    traj.omega_gen = Matrix(steps + 1, k);
    traj.delta_load = Matrix(steps + 1, nl);
    traj.converged.assign(steps + 1, 1);

    Vec dg(k, 0.0), og(k, 0.0), dl(nl, 0.0);
    Vec full(n), fl(n);

    auto gen_accel = [&](const Vec& dgs, const Vec& ogs, const Vec& dls, Vec& out) {
        sys.fill_full(dgs, dls, full);
        sys.flows(full, fl);
        for (int a = 0; a < k; ++a)
            out[a] = (p_gen[a] - d*ogs[a] - fl[sys.gens[a]])/m;
    };

    Vec acc_prev(k);
    for (int s = 0; s <= steps; ++s) {
        traj.times[s] = s*h;
        if (sys.solve_loads(dg, dl, cfg.newton_tol, cfg.newton_max_iter) < 0)
            throw AlgebraicSolveFailure("load power balance Newton diverged", s*h);
        for (int a = 0; a < k; ++a) {
            traj.delta_gen(s, a) = dg[a];
            traj.omega_gen(s, a) = og[a];
        }
        for (int b = 0; b < nl; ++b) traj.delta_load(s, b) = dl[b];
        if (s == steps) break;

        gen_accel(dg, og, dl, acc_prev);

        // unknown z = (dg', og', dl'); explicit Euler predictor
        Vec ndg = dg, nog = og, ndl = dl;
        for (int a = 0; a < k; ++a) {
            ndg[a] += h*og[a];
            nog[a] += h*acc_prev[a];
        }

        bool done = false;
        for (int it = 0; it < cfg.newton_max_iter; ++it) {
            sys.fill_full(ndg, ndl, full);
            sys.flows(full, fl);
            Vec res(dim);
            for (int a = 0; a < k; ++a) {
                double acc = (p_gen[a] - d*nog[a] - fl[sys.gens[a]])/m;
                res[a] = ndg[a] - dg[a] - 0.5*h*(og[a] + nog[a]);
                res[k + a] = nog[a] - og[a] - 0.5*h*(acc_prev[a] + acc);
            }
            for (int b = 0; b < nl; ++b) res[2*k + b] = fl[sys.loads[b]] - sys.p_load[b];
            if (norm_inf(res) <= cfg.newton_tol) {
                done = true;
                break;
            }

            // J blocks from the cos-weighted Laplacian at the trial point
            SymMatrix lc(n);
            for (const Edge& e : sys.g.edges()) {
                double w = e.weight*std::cos(full[e.i] - full[e.j]);
                lc.add(e.i, e.i, w);
                lc.add(e.j, e.j, w);
                lc.add(e.i, e.j, -w);
            }
            Matrix jac(dim, dim);
            for (int a = 0; a < k; ++a) {
                jac(a, a) = 1.0;
                jac(a, k + a) = -0.5*h;
                jac(k + a, k + a) = 1.0 + 0.5*h*d/m;
                for (int a2 = 0; a2 < k; ++a2)
                    jac(k + a, a2) = 0.5*h/m*lc(sys.gens[a], sys.gens[a2]);
                for (int b = 0; b < nl; ++b)
                    jac(k + a, 2*k + b) = 0.5*h/m*lc(sys.gens[a], sys.loads[b]);
            }
            for (int b = 0; b < nl; ++b) {
                for (int a2 = 0; a2 < k; ++a2)
                    jac(2*k + b, a2) = lc(sys.loads[b], sys.gens[a2]);
                for (int b2 = 0; b2 < nl; ++b2)
                    jac(2*k + b, 2*k + b2) = lc(sys.loads[b], sys.loads[b2]);
            }
            Lu lf = lu_factor(std::move(jac));
            if (!lf.ok) throw AlgebraicSolveFailure("trapezoid Jacobian singular", s*h);
            lf.solve_in_place(res);
            for (int a = 0; a < k; ++a) {
                ndg[a] -= res[a];
                nog[a] -= res[k + a];
            }
            for (int b = 0; b < nl; ++b) ndl[b] -= res[2*k + b];
        }
        if (!done) throw AlgebraicSolveFailure("trapezoid Newton diverged", s*h);
        dg = ndg;
        og = nog;
        dl = ndl;
    }
    return traj;
}

}  // namespace

Vec solve_load_algebra(const PowerGraph& g, const Vec& delta_gen, const Vec& p,
                       const Vec* initial_guess, double tol, int max_iter) {
    if (static_cast<int>(p.size()) != g.node_count())
        throw InvalidParameter("injection length mismatch");
    if (static_cast<int>(delta_gen.size()) != g.generator_count())
        throw InvalidParameter("generator angle length mismatch");
    DaeSystem sys(g, p);
    Vec dl(sys.nl, 0.0);
    if (initial_guess) {
        if (static_cast<int>(initial_guess->size()) != sys.nl)
            throw InvalidParameter("initial guess length mismatch");
        dl = *initial_guess;
    }
    if (sys.solve_loads(delta_gen, dl, tol, max_iter) < 0)
        throw AlgebraicSolveFailure("load power balance Newton diverged");
    return dl;
}

Trajectory simulate_dae(const PowerGraph& g, const Vec& p, const Vec& u0,
                        const SimulationConfig& cfg) {
    validate_config(cfg);
    if (static_cast<int>(p.size()) != g.node_count())
        throw InvalidParameter("injection length mismatch");
    if (static_cast<int>(u0.size()) != g.generator_count())
        throw InvalidParameter("u0 length mismatch");
    validate_balance(p);
    DaeSystem sys(g, p);
    return cfg.integrator == Integrator::Rk4SemiExplicit ? run_rk4(sys, p, u0, cfg)
                                                         : run_trapezoid(sys, p, u0, cfg);
}

Trajectory simulate_linear_reduced(const SymMatrix& l_red, double inertia, double damping,
                                   const Vec& u0, const SimulationConfig& cfg) {
    validate_config(cfg);
    ModalSystem sys = ModalSystem::from_reduced(l_red, inertia, damping);
    const int k = sys.k;
    if (static_cast<int>(u0.size()) != k) throw InvalidParameter("u0 length mismatch");
    const double m = inertia, d = damping;
    const int steps = static_cast<int>(std::llround(cfg.horizon/cfg.dt));

    Vec z0(k, 0.0);
    for (int i = 0; i < k; ++i)
        for (int a = 0; a < k; ++a) z0[i] += sys.eigen.V(a, i)*u0[a];

    Vec times(steps + 1);
    for (int s = 0; s <= steps; ++s) times[s] = s*cfg.dt;

    // per-mode omega and delta responses
    Matrix homega(k, steps + 1), hdelta(k, steps + 1);
    for (int i = 0; i < k; ++i) {
        double lam = std::max(sys.eigen.eigenvalues[i], 0.0);
        if (i == 0) lam = 0.0;
        Vec hw = modal_step_response(m, d, lam, times);
        for (int s = 0; s <= steps; ++s) homega(i, s) = hw[s];
        if (lam == 0.0) {
            for (int s = 0; s <= steps; ++s) {
                double t = times[s];
                hdelta(i, s) = t/d - m/(d*d)*(1.0 - std::exp(-d*t/m));
            }
            continue;
        }
        const double disc = d*d - 4.0*m*lam;
        const double scale = d*d + 4.0*m*lam;
        if (disc > 1e-9*scale) {
            double root = std::sqrt(disc);
            double r1 = (-d + root)/(2.0*m), r2 = (-d - root)/(2.0*m);
            for (int s = 0; s <= steps; ++s) {
                double t = times[s];
                hdelta(i, s) = (1.0 - (r2*std::exp(r1*t) - r1*std::exp(r2*t))/(r2 - r1))/lam;
            }
        } else if (disc < -1e-9*scale) {
            double sig = d/(2.0*m), wd = std::sqrt(-disc)/(2.0*m);
            for (int s = 0; s <= steps; ++s) {
                double t = times[s];
                hdelta(i, s) =
                    (1.0 - std::exp(-sig*t)*(std::cos(wd*t) + sig/wd*std::sin(wd*t)))/lam;
            }
        } else {
            double r = -d/(2.0*m);
            for (int s = 0; s <= steps; ++s) {
                double t = times[s];
                hdelta(i, s) = (1.0 - (1.0 - r*t)*std::exp(r*t))/lam;
            }
        }
    }

    Trajectory traj;
    traj.times = std::move(times);
    traj.delta_gen = Matrix(steps + 1, k);
    traj.omega_gen = Matrix(steps + 1, k);
    traj.delta_load = Matrix(steps + 1, 0);
    traj.converged.assign(steps + 1, 1);
    for (int s = 0; s <= steps; ++s) {
        for (int a = 0; a < k; ++a) {
            double w = 0.0, dl = 0.0;
            for (int i = 0; i < k; ++i) {
                double vz = sys.eigen.V(a, i)*z0[i];
                w += vz*homega(i, s);
                dl += vz*hdelta(i, s);
            }
            traj.omega_gen(s, a) = w;
            traj.delta_gen(s, a) = dl;
        }
    }
    return traj;
}

double finite_horizon_l2(const Trajectory& traj, NormComponent component) {
    const int steps = traj.omega_gen.rows();
    const int k = traj.omega_gen.cols();
    if (steps < 2) return 0.0;
    const double dt = traj.times[1] - traj.times[0];
    double acc = 0.0;
    Vec row(k);
    for (int s = 0; s < steps; ++s) {
        const double* src = traj.omega_gen.row(s);
        double sq;
        if (component == NormComponent::OmegaTilde) {
            double mean = 0.0;
            for (int a = 0; a < k; ++a) mean += src[a];
            mean /= k;
            for (int a = 0; a < k; ++a) row[a] = src[a] - mean;
            sq = kernels::sum_sq(row.data(), k);
        } else {
            sq = kernels::sum_sq(src, k);
        }
        double weight = (s == 0 || s == steps - 1) ? 0.5 : 1.0;
        acc += weight*sq;
    }
    return std::sqrt(acc*dt);
}

MonteCarloReport monte_carlo_compare(
    const std::vector<std::pair<std::string, PowerGraph>>& variants, int n_samples,
    double sigma, std::uint64_t seed, const SimulationConfig& cfg) {
    if (variants.empty()) throw InvalidParameter("need at least one variant");
    if (n_samples < 1) throw InvalidParameter("need at least one sample");
    if (sigma < 0.0) throw InvalidParameter("sigma must be nonnegative");
    validate_config(cfg);

    const PowerGraph& ref = variants.front().second;
    const int k = ref.generator_count();
    for (const auto& [name, g] : variants) {
        if (g.generators() != ref.generators() || g.node_count() != ref.node_count())
            throw InvalidParameter("variants must share the generator set");
        if (g.inertia() != ref.inertia() || g.damping() != ref.damping())
            throw InvalidParameter("variants must share generator parameters");
    }

    MonteCarloReport rep;
    rep.seed = seed;
    rep.sample_count = n_samples;
    rep.sigma = sigma;
    for (const auto& [name, g] : variants) rep.variant_names.push_back(name);
    rep.samples.resize(n_samples);

    const int nv = static_cast<int>(variants.size());
    const Vec p_zero(ref.node_count(), 0.0);
    for (int s = 0; s < n_samples; ++s) {
        Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(s)));
        Vec u0(k);
        for (double& v : u0) v = sigma*rng.next_normal();
        MonteCarloSample& rec = rep.samples[s];
        rec.u0_hash = fnv1a_hash(u0);
        rec.norm_tilde.assign(nv, 0.0);
        rec.norm_omega.assign(nv, 0.0);
        rec.ok = true;
        for (int v = 0; v < nv; ++v) {
            try {
                Trajectory traj = simulate_dae(variants[v].second, p_zero, u0, cfg);
                rec.norm_tilde[v] = finite_horizon_l2(traj, NormComponent::OmegaTilde);
                rec.norm_omega[v] = finite_horizon_l2(traj, NormComponent::Omega);
            } catch (const AlgebraicSolveFailure&) {
                rec.ok = false;
            }
        }
    }

    rep.mean_reduction_pct.assign(nv, 0.0);
    rep.mean_reduction_pct_omega.assign(nv, 0.0);
    rep.win_rate.assign(nv, 0.0);
    for (int v = 1; v < nv; ++v) {
        double acc = 0.0, acc_omega = 0.0, wins = 0.0;
        int used = 0;
        for (const MonteCarloSample& rec : rep.samples) {
            if (!rec.ok) continue;
            ++used;
            if (rec.norm_tilde[v] > 0.0)
                acc += 100.0*(rec.norm_tilde[v] - rec.norm_tilde[0])/rec.norm_tilde[v];
            if (rec.norm_omega[v] > 0.0)
                acc_omega += 100.0*(rec.norm_omega[v] - rec.norm_omega[0])/rec.norm_omega[v];
            if (rec.norm_tilde[0] < rec.norm_tilde[v])
                wins += 1.0;
            else if (rec.norm_tilde[0] == rec.norm_tilde[v])
                wins += 0.5;
        }
        if (used > 0) {
            rep.mean_reduction_pct[v] = acc/used;
            rep.mean_reduction_pct_omega[v] = acc_omega/used;
            rep.win_rate[v] = wins/used;
        }
    }
    for (const MonteCarloSample& rec : rep.samples)
        if (!rec.ok) ++rep.excluded;
    return rep;
}

double steady_state_cohesion_report(const PowerGraph& g, const Vec& p, const Vec& u0) {
    const int n = g.node_count();
    const int k = g.generator_count();
    if (static_cast<int>(p.size()) != n) throw InvalidParameter("injection length mismatch");
    if (static_cast<int>(u0.size()) != k) throw InvalidParameter("u0 length mismatch");
    validate_balance(p);
    // generators carry the damping, so the synchronous frame absorbs the mean
    // of u0 over the generators; the balanced remainder shifts the equilibrium
    double mean = sum(u0)/k;
    Vec pt = p;
    const auto& gens = g.generators();
    for (int a = 0; a < k; ++a) pt[gens[a]] += u0[a] - mean;
    SyncState st = solve_sync_state(g, pt);
    return st.incremental_norm;
}

}  // namespace gridsync
