#include "gridsync/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gridsync/kernels.hpp"
#include "gridsync/rng.hpp"

namespace gridsync {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Base Laplacian, candidate arcs, and the orthonormal basis P with C = PP^T.
struct Workspace {
    int n = 0, k = 0, m = 0;
    std::vector<std::pair<int, int>> cand;
    SymMatrix l_base;
    Matrix p_basis;  // n x (k-1)
    double beta = 1.0;

    explicit Workspace(const DesignProblem& prob) {
        const PowerGraph& g = prob.base_graph;
        n = g.node_count();
        k = g.generator_count();
        cand = prob.resolved_candidates();
        m = static_cast<int>(cand.size());
        beta = prob.beta;
        if (!(beta > 0.0)) throw InvalidParameter("beta must be positive");
        if (!(prob.alpha >= 0.0)) throw InvalidParameter("alpha must be nonnegative");
        l_base = build_laplacian(g);

        SymMatrix c = generator_projector(n, g.generators());
        EigenDecomposition ec = eigendecompose(c);
        p_basis = Matrix(n, k - 1);
        int col = 0;
        for (int j = 0; j < n && col < k - 1; ++j) {
            if (ec.eigenvalues[j] > 0.5) {
                for (int i = 0; i < n; ++i) p_basis(i, col) = ec.V(i, j);
                ++col;
            }
        }
        if (col != k - 1) throw NumericalFailure("unexpected projector rank");
    }

    SymMatrix laplacian_at(const Vec& x) const {
        SymMatrix l = l_base;
        for (int e = 0; e < m; ++e) {
            auto [i, j] = cand[e];
            l.add(i, i, x[e]);
            l.add(j, j, x[e]);
            l.add(i, j, -x[e]);
        }
        return l;
    }

    // L(x) - tau*I + (one_coef/n) 11'; PD iff lambda2(L(x)) > tau
    // whenever one_coef > tau.
    SymMatrix shifted(const Vec& x, double tau, double one_coef) const {
        SymMatrix mat = laplacian_at(x);
        const double shift = one_coef/n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j)
                mat.set(i, j, mat(i, j) + shift - (i == j ? tau : 0.0));
        return mat;
    }

    Matrix candidate_rhs() const {
        Matrix rhs(n, m);
        for (int e = 0; e < m; ++e) {
            auto [i, j] = cand[e];
            rhs(i, e) = -1.0;
            rhs(j, e) = 1.0;
        }
        return rhs;
    }

    // f = trace(P' Y^{-1} P), df/dx_e = -||d_e||^2 with d_e the Q-row
    // difference across arc e, d2f = 2 (B'Y^{-1}B) o (B'QQ'B)
    bool objective(const Vec& x, double* f, Vec* grad, Matrix* hess) const {
        Cholesky fac = cholesky(regularized_laplacian(laplacian_at(x), beta));
        if (!fac.ok) return false;
        Matrix q = fac.solve(p_basis);
        double val = 0.0;
        for (int c = 0; c < k - 1; ++c)
            for (int i = 0; i < n; ++i) val += p_basis(i, c)*q(i, c);
        *f = val;
        if (!grad && !hess) return true;

        Matrix d(m, std::max(k - 1, 1));
        for (int e = 0; e < m; ++e) {
            auto [i, j] = cand[e];
            for (int c = 0; c < k - 1; ++c) d(e, c) = q(j, c) - q(i, c);
        }
        if (grad) {
            grad->assign(m, 0.0);
            for (int e = 0; e < m; ++e)
                (*grad)[e] = -kernels::sum_sq(d.row(e), k - 1);
        }
        if (hess) {
            Matrix u = fac.solve(candidate_rhs());
            *hess = Matrix(m, m);
            for (int e = 0; e < m; ++e) {
                auto [ie, je] = cand[e];
                for (int g2 = 0; g2 <= e; ++g2) {
                    double gy = u(je, g2) - u(ie, g2);
                    double gs = kernels::dot(d.row(e), d.row(g2), k - 1);
                    double v = 2.0*gy*gs;
                    (*hess)(e, g2) = v;
                    (*hess)(g2, e) = v;
                }
            }
        }
        return true;
    }
};

double tau_one_coef(double tau) { return tau + std::max(tau, 1.0); }

// t*f(x) - logdet M(x) - sum log(x-lb) - log(alpha - 1'x); +inf off-domain
double composite_value(const Workspace& ws, const Vec& x, const Vec& lb, double alpha,
                       double tau, double t) {
    double slack = alpha - sum(x);
    if (!(slack > 0.0)) return kInf;
    double boxsum = 0.0;
    for (std::size_t e = 0; e < x.size(); ++e) {
        double d = x[e] - lb[e];
        if (!(d > 0.0)) return kInf;
        boxsum += std::log(d);
    }
    Cholesky mf = cholesky(ws.shifted(x, tau, tau_one_coef(tau)));
    if (!mf.ok) return kInf;
    double f = 0.0;
    if (!ws.objective(x, &f, nullptr, nullptr)) return kInf;
    return t*f - mf.logdet() - boxsum - std::log(slack);
}

struct StageOutcome {
    bool converged = false;
    int iterations = 0;
    double grad_inf = 0.0;
};

// one damped-Newton stage of min_x t*f + barriers at fixed t
StageOutcome newton_stage(const Workspace& ws, Vec& x, const Vec& lb, double alpha,
                          double tau, double t, const SolverOptions& opt) {
    const int m = ws.m;
    StageOutcome out;
    for (int it = 0; it < opt.newton_iteration_cap; ++it) {
        out.iterations = it + 1;
        double f = 0.0;
        Vec gf;
        Matrix hf;
        if (!ws.objective(x, &f, &gf, &hf))
            throw NumericalFailure("objective undefined at interior iterate");
        Cholesky mf = cholesky(ws.shifted(x, tau, tau_one_coef(tau)));
        if (!mf.ok) throw NumericalFailure("LMI barrier undefined at interior iterate");
        Matrix w = mf.solve(ws.candidate_rhs());

        double slack = alpha - sum(x);
        Vec g(m);
        SymMatrix h(m);
        for (int e = 0; e < m; ++e) {
            auto [ie, je] = ws.cand[e];
            double gphi = -(w(je, e) - w(ie, e));
            double d = x[e] - lb[e];
            g[e] = t*gf[e] + gphi - 1.0/d + 1.0/slack;
            for (int g2 = 0; g2 <= e; ++g2) {
                auto [ig, jg] = ws.cand[g2];
                double gm = w(je, g2) - w(ie, g2);
                (void)ig;
                (void)jg;
                double v = t*hf(e, g2) + gm*gm + 1.0/(slack*slack);
                if (e == g2) v += 1.0/(d*d);
                h.set(e, g2, v);
            }
        }
        out.grad_inf = norm_inf(g);

        double ridge = 1e-13*std::max(1.0, h.max_abs());
        for (int e = 0; e < m; ++e) h.set(e, e, h(e, e) + ridge);
        Cholesky hfac = cholesky(h);
        Vec dir = hfac.ok ? hfac.solve(g) : g;
        for (double& v : dir) v = -v;
        double decrement = -dot(g, dir);
        if (decrement*0.5 < opt.newton_decrement_tol) {
            out.converged = true;
            return out;
        }

        double v0 = t*f - mf.logdet() - std::log(slack);
        for (int e = 0; e < m; ++e) v0 -= std::log(x[e] - lb[e]);
        double slope = dot(g, dir);
        double step = 1.0;
        Vec xn(m);
        while (true) {
            for (int e = 0; e < m; ++e) xn[e] = x[e] + step*dir[e];
            double vn = composite_value(ws, xn, lb, alpha, tau, t);
            if (vn <= v0 + 0.25*step*slope) break;
            step *= 0.5;
            if (step < 1e-16) return out;  // stalled short of the decrement tol
        }
        x = xn;
    }
    return out;
}

struct InteriorOutcome {
    Vec x;
    bool converged = false;
    long iterations = 0;
    double final_t = 0.0;
    double stationarity = 0.0;
};

InteriorOutcome interior_minimize(const Workspace& ws, Vec x0, const Vec& lb, double alpha,
                                  double tau, const SolverOptions& opt,
                                  std::vector<IterationRecord>* log) {
    InteriorOutcome out;
    out.x = std::move(x0);
    double t = opt.barrier_t_initial;
    while (true) {
        StageOutcome stage = newton_stage(ws, out.x, lb, alpha, tau, t, opt);
        out.iterations += stage.iterations;
        out.converged = stage.converged;
        out.final_t = t;
        out.stationarity = stage.grad_inf/t;
        if (log) {
            double f = 0.0;
            ws.objective(out.x, &f, nullptr, nullptr);
            log->push_back({out.iterations, f, out.stationarity, t});
        }
        if (t >= opt.barrier_t_final || out.iterations > opt.max_iterations) break;
        t = std::min(t*opt.barrier_t_multiplier, opt.barrier_t_final);
    }
    return out;
}

struct Phase1Outcome {
    double s = 0.0;  // lower bound on the achievable lambda2
    Vec x;           // iterate with lambda2(L(x)) > s
    long iterations = 0;
    bool reached_stop = false;
    double gap = 0.0;
};

// maximize s subject to lambda2(L(x)) > s over the box-simplex interior;
// barrier matrix M(x, s) = L(x) - s*I + ((s+1)/n) 11'
Phase1Outcome maximize_lambda2(const Workspace& ws, const Vec& lb, double alpha,
                               const SolverOptions& opt, double stop_s = kInf) {
    const int m = ws.m;
    const int n = ws.n;
    Phase1Outcome out;

    double room = alpha - sum(lb);
    if (!(room > 0.0)) throw InvalidParameter("box-simplex has empty interior");
    Vec x(m);
    for (int e = 0; e < m; ++e) x[e] = lb[e] + 0.5*room/m;
    double s = 0.5*lambda2(ws.laplacian_at(x));

    auto value = [&](const Vec& xx, double ss, double t) {
        double slack = alpha - sum(xx);
        if (!(slack > 0.0)) return kInf;
        double boxsum = 0.0;
        for (int e = 0; e < m; ++e) {
            double d = xx[e] - lb[e];
            if (!(d > 0.0)) return kInf;
            boxsum += std::log(d);
        }
        Cholesky fac = cholesky(ws.shifted(xx, ss, ss + 1.0));
        if (!fac.ok) return kInf;
        return -t*ss - fac.logdet() - boxsum - std::log(slack);
    };

    double t = opt.barrier_t_initial;
    while (true) {
        for (int it = 0; it < opt.newton_iteration_cap; ++it) {
            ++out.iterations;
            Cholesky fac = cholesky(ws.shifted(x, s, s + 1.0));
            if (!fac.ok) throw NumericalFailure("phase-1 iterate left the domain");
            Matrix w = fac.solve(ws.candidate_rhs());
            Matrix minv = fac.solve(Matrix::identity(n));

            Vec minv_rowsum(n, 0.0);
            double trace_minv = 0.0;
            for (int i = 0; i < n; ++i) {
                trace_minv += minv(i, i);
                for (int j = 0; j < n; ++j) minv_rowsum[i] += minv(i, j);
            }
            double total = sum(minv_rowsum);
            double trace_mp = trace_minv - total/n;  // trace(M^{-1} Pi)

            double slack = alpha - sum(x);
            Vec g(m + 1);
            SymMatrix h(m + 1);
            for (int e = 0; e < m; ++e) {
                auto [ie, je] = ws.cand[e];
                double d = x[e] - lb[e];
                g[e] = -(w(je, e) - w(ie, e)) - 1.0/d + 1.0/slack;
                for (int g2 = 0; g2 <= e; ++g2) {
                    double gm = w(je, g2) - w(ie, g2);
                    double v = gm*gm + 1.0/(slack*slack);
                    if (e == g2) v += 1.0/(d*d);
                    h.set(e, g2, v);
                }
                // d2/dx_e ds = -w_e' Pi w_e
                double mean_we = 0.0;
                for (int i = 0; i < n; ++i) mean_we += w(i, e);
                mean_we /= n;
                double cross = 0.0;
                for (int i = 0; i < n; ++i) cross += w(i, e)*(w(i, e) - mean_we);
                h.set(e, m, -cross);
            }
            g[m] = -t + trace_mp;
            double hss = 0.0;  // trace((M^{-1} Pi)^2)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    hss += (minv(i, j) - minv_rowsum[i]/n)*(minv(j, i) - minv_rowsum[j]/n);
            h.set(m, m, hss);

            double ridge = 1e-13*std::max(1.0, h.max_abs());
            for (int e = 0; e <= m; ++e) h.set(e, e, h(e, e) + ridge);
            Cholesky hfac = cholesky(h);
            Vec dir = hfac.ok ? hfac.solve(g) : g;
            for (double& v : dir) v = -v;
            double decrement = -dot(g, dir);
            if (decrement*0.5 < opt.newton_decrement_tol) break;

            double v0 = value(x, s, t);
            double slope = dot(g, dir);
            double step = 1.0;
            Vec xn(m);
            double sn = s;
            bool moved = false;
            while (true) {
                for (int e = 0; e < m; ++e) xn[e] = x[e] + step*dir[e];
                sn = s + step*dir[m];
                if (value(xn, sn, t) <= v0 + 0.25*step*slope) {
                    moved = true;
                    break;
                }
                step *= 0.5;
                if (step < 1e-16) break;
            }
            if (!moved) break;
            x = xn;
            s = sn;
            if (s >= stop_s) {
                out.s = s;
                out.x = std::move(x);
                out.reached_stop = true;
                out.gap = (n + m + 1)/t;
                return out;
            }
        }
        if (t >= opt.barrier_t_final) break;
        t = std::min(t*opt.barrier_t_multiplier, opt.barrier_t_final);
    }
    out.s = s;
    out.x = std::move(x);
    out.gap = (n + m + 1)/opt.barrier_t_final;
    return out;
}

OptimizationResult assemble_result(const Workspace& ws, const DesignProblem& prob,
                                   const Vec& x, OptimizationResult::Status status,
                                   long iterations, double stationarity, double tau) {
    OptimizationResult res;
    res.status = status;
    res.x_star = x;
    double f = 0.0;
    if (!ws.objective(x, &f, nullptr, nullptr))
        throw NumericalFailure("objective undefined at solution");
    res.objective = f;
    res.r_tot_reduced = ws.k*f;
    res.lambda2 = lambda2(ws.laplacian_at(x));
    res.stationarity = stationarity;
    res.iterations = iterations;
    res.budget_used = sum(x);
    double simplex_violation = std::max(0.0, res.budget_used - prob.alpha);
    double lmi_violation = tau > 0.0 ? std::max(0.0, tau - res.lambda2) : 0.0;
    res.feasibility_violation = std::max(simplex_violation, lmi_violation);
    if (prob.allow_negative) {
        Vec lb = prob.resolved_lower_bounds();
        for (int e = 0; e < ws.m; ++e)
            if (x[e] - lb[e] < 1e-6*std::max(1.0, std::abs(lb[e]))) res.lower_bound_active = true;
    }
    return res;
}

// shared driver for the lambda2-constrained solves
OptimizationResult constrained_solve(const DesignProblem& prob) {
    if (!prob.cohesion) throw InvalidParameter("cohesion spec required");
    Workspace ws(prob);
    const double tau = lmi_threshold(*prob.cohesion);
    Vec lb = prob.resolved_lower_bounds();
    const SolverOptions& opt = prob.options;

    double room = prob.alpha - sum(lb);
    if (!(room > 0.0)) {
        if (room == 0.0) {
            // the box-simplex is the single point lb
            double l2 = lambda2(ws.laplacian_at(lb));
            if (l2 + 1e-12 < tau) {
                OptimizationResult res;
                res.status = OptimizationResult::Status::Infeasible;
                return res;
            }
            return assemble_result(ws, prob, lb, OptimizationResult::Status::Converged, 0, 0.0,
                                   tau);
        }
        throw InvalidParameter("alpha below the sum of lower bounds");
    }

    Vec x0(ws.m);
    for (int e = 0; e < ws.m; ++e) x0[e] = lb[e] + 0.5*room/ws.m;
    long phase1_iters = 0;

    if (!(lambda2(ws.laplacian_at(x0)) > tau*(1.0 + 1e-8) + 1e-12)) {
        double stop = tau + 0.1*std::max(1.0, tau);
        Phase1Outcome ph1 = maximize_lambda2(ws, lb, prob.alpha, opt, stop);
        phase1_iters = ph1.iterations;
        if (!ph1.reached_stop) {
            double upper = ph1.s + ph1.gap;
            double achieved = lambda2(ws.laplacian_at(ph1.x));
            if (upper < tau - opt.feasibility_tol) {
                OptimizationResult res;
                res.status = OptimizationResult::Status::Infeasible;
                res.lambda2 = achieved;
                res.iterations = phase1_iters;
                res.feasibility_violation = tau - achieved;
                return res;
            }
            if (!(achieved > tau*(1.0 + 1e-10) + 1e-14)) {
                // feasible set is within the barrier gap of the max-lambda2
                // point; report that point
                return assemble_result(ws, prob, ph1.x, OptimizationResult::Status::Converged,
                                       phase1_iters, 0.0, tau);
            }
        }
        x0 = std::move(ph1.x);
    }

    OptimizationResult res;
    InteriorOutcome io = interior_minimize(ws, std::move(x0), lb, prob.alpha, tau, opt,
                                           &res.log);
    OptimizationResult::Status status = io.converged
                                            ? OptimizationResult::Status::Converged
                                            : OptimizationResult::Status::NotConverged;
    OptimizationResult full = assemble_result(ws, prob, io.x, status,
                                              phase1_iters + io.iterations, io.stationarity,
                                              tau);
    full.log = std::move(res.log);
    return full;
}

}  // namespace

std::vector<std::pair<int, int>> DesignProblem::resolved_candidates() const {
    std::set<std::pair<int, int>> canon;
    if (candidate_edges.empty()) {
        for (const Edge& e : base_graph.edges()) canon.insert({e.i, e.j});
    } else {
        const int n = base_graph.node_count();
        for (auto [i, j] : candidate_edges) {
            if (i == j || i < 0 || j < 0 || i >= n || j >= n)
                throw InvalidParameter("bad candidate edge");
            canon.insert({std::min(i, j), std::max(i, j)});
        }
    }
    return {canon.begin(), canon.end()};
}

Vec DesignProblem::resolved_lower_bounds() const {
    auto cands = resolved_candidates();
    if (!lower_bounds.empty()) {
        if (lower_bounds.size() != cands.size())
            throw InvalidParameter("lower_bounds length mismatch");
        return lower_bounds;
    }
    Vec lb(cands.size(), 0.0);
    if (allow_negative) {
        for (std::size_t e = 0; e < cands.size(); ++e) {
            for (const Edge& be : base_graph.edges())
                if (be.i == cands[e].first && be.j == cands[e].second) lb[e] = -be.weight;
        }
    }
    return lb;
}

std::pair<double, Vec> objective_and_gradient(const DesignProblem& prob, const Vec& x) {
    Workspace ws(prob);
    if (static_cast<int>(x.size()) != ws.m) throw InvalidParameter("design vector length");
    double f = 0.0;
    Vec g;
    if (!ws.objective(x, &f, &g, nullptr))
        throw NumericalFailure("regularized Laplacian not positive definite at x");
    return {f, std::move(g)};
}

Vec project_box_simplex(Vec y, const Vec& lb, double alpha) {
    const std::size_t m = y.size();
    if (lb.size() != m) throw InvalidParameter("bound length mismatch");
    double lbsum = sum(lb);
    double radius = alpha - lbsum;
    if (radius < -1e-12) throw InvalidParameter("alpha below the sum of lower bounds");
    if (radius <= 0.0) return lb;  // feasible set degenerates to the corner
    Vec z(m);
    double zsum = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
        z[e] = std::max(y[e], lb[e]);
        zsum += z[e];
    }
    if (zsum <= alpha + 1e-15*std::max(1.0, std::abs(alpha))) return z;

    // active budget: project y - lb onto the simplex of the remaining radius
    Vec u(m);
    for (std::size_t e = 0; e < m; ++e) u[e] = y[e] - lb[e];
    Vec srt = u;
    std::sort(srt.begin(), srt.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    std::size_t rho = 0;
    for (std::size_t r = 0; r < m; ++r) {
        css += srt[r];
        double cand = (css - radius)/static_cast<double>(r + 1);
        if (srt[r] - cand > 0.0) {
            rho = r;
            theta = cand;
        }
    }
    (void)rho;
    for (std::size_t e = 0; e < m; ++e) z[e] = std::max(u[e] - theta, 0.0) + lb[e];
    return z;
}

OptimizationResult solve_p0(const DesignProblem& prob) {
    if (prob.allow_negative)
        throw InvalidParameter("negative updates need the cohesion constraint; use solve_rewire");
    Workspace ws(prob);
    Vec lb = prob.resolved_lower_bounds();
    const SolverOptions& opt = prob.options;

    Vec x = project_box_simplex(Vec(ws.m, 0.0), lb, prob.alpha);
    double t = 1.0;
    double f = 0.0;
    Vec g;
    if (!ws.objective(x, &f, &g, nullptr)) throw NumericalFailure("objective undefined at start");

    OptimizationResult res;
    long it = 0;
    double stationarity = kInf;
    for (; it < opt.max_iterations; ++it) {
        // fixed-point residual of the projected-gradient map with unit step
        Vec probe = x;
        axpy(-1.0, g, probe);
        Vec fixed = project_box_simplex(probe, lb, prob.alpha);
        double acc = 0.0;
        for (int e = 0; e < ws.m; ++e) acc += (fixed[e] - x[e])*(fixed[e] - x[e]);
        stationarity = std::sqrt(acc);
        if (it % opt.log_stride == 0) res.log.push_back({it, f, stationarity, 0.0});
        if (stationarity <= opt.stationarity_tol) break;

        while (true) {
            Vec trial = x;
            axpy(-t, g, trial);
            Vec xn = project_box_simplex(trial, lb, prob.alpha);
            double fn = 0.0;
            if (ws.objective(xn, &fn, nullptr, nullptr)) {
                double quad = 0.0, lin = 0.0;
                for (int e = 0; e < ws.m; ++e) {
                    double de = xn[e] - x[e];
                    lin += g[e]*de;
                    quad += de*de;
                }
                if (fn <= f + lin + quad/(2.0*t) + 1e-14*std::max(1.0, std::abs(f))) {
                    x = std::move(xn);
                    f = fn;
                    break;
                }
            }
            t *= 0.5;
            if (t < 1e-18) throw NumericalFailure("line search collapsed");
        }
        if (!ws.objective(x, &f, &g, nullptr)) throw NumericalFailure("objective undefined");
        t = std::min(t*1.3, 1e8);
    }

    OptimizationResult::Status status = stationarity <= opt.stationarity_tol
                                            ? OptimizationResult::Status::Converged
                                            : OptimizationResult::Status::NotConverged;
    auto log = std::move(res.log);
    OptimizationResult full = assemble_result(ws, prob, x, status, it, stationarity, 0.0);
    full.log = std::move(log);
    return full;
}

OptimizationResult solve_p2(const DesignProblem& prob) {
    if (prob.allow_negative)
        throw InvalidParameter("use solve_rewire for the sign-relaxed problem");
    return constrained_solve(prob);
}

OptimizationResult solve_rewire(const DesignProblem& prob) {
    if (!prob.allow_negative) throw InvalidParameter("rewiring requires allow_negative");
    if (!prob.cohesion)
        throw InvalidParameter("rewiring requires a cohesion spec to keep the graph connected");
    return constrained_solve(prob);
}

PsiSweepResult max_feasible_psi(const DesignProblem& prob_template, double gamma,
                                double psi_step) {
    if (!(psi_step > 0.0)) throw InvalidParameter("psi_step must be positive");
    if (!(gamma > 0.0) || !(gamma < M_PI/2)) throw InvalidParameter("gamma out of range");
    DesignProblem prob = prob_template;
    Workspace ws(prob);
    Vec lb = prob.resolved_lower_bounds();

    std::vector<std::pair<int, int>> base_pairs;
    for (const Edge& e : prob.base_graph.edges()) base_pairs.emplace_back(e.i, e.j);
    CohesionSpec proto = CohesionSpec::make(gamma, psi_step, ws.n, base_pairs, ws.cand);
    const double bnorm = incidence_spectral_norm(ws.n, proto.edge_set_hat);
    const double sin_gamma = std::sin(gamma);

    Phase1Outcome ph1 = maximize_lambda2(ws, lb, prob.alpha, prob.options);
    const double achieved = lambda2(ws.laplacian_at(ph1.x));
    const double upper = ph1.s + ph1.gap;

    PsiSweepResult sweep;
    sweep.lambda2_max = achieved;
    double psi_cont = upper*sin_gamma/bnorm;
    double psi_max = std::floor(psi_cont/psi_step + 1e-9)*psi_step;

    Vec x_prev = ph1.x;
    double lam_prev = achieved;
    int steps = static_cast<int>(std::llround(psi_max/psi_step));
    for (int si = 1; si <= steps; ++si) {
        double psi = si*psi_step;
        double tau = psi*bnorm/sin_gamma;
        SweepPoint pt;
        pt.psi = psi;
        if (tau >= achieved - 1e-12) {
            // inside the barrier gap of the maximizer: the feasible set has
            // shrunk to (numerically) the max-lambda2 point
            double f = 0.0;
            ws.objective(ph1.x, &f, nullptr, nullptr);
            pt.feasible = true;
            pt.optimal_value = ws.k*f;
            sweep.points.push_back(pt);
            sweep.psi_max = psi;
            sweep.value_at_psi_max = pt.optimal_value;
            continue;
        }
        // warm start: blend toward the max-lambda2 point until strictly inside
        double margin = std::max(1e-7, 4.0*psi_step*bnorm/sin_gamma);
        Vec x0 = x_prev;
        double lam0 = lam_prev;
        if (lam0 <= tau + margin) {
            double denom = achieved - lam0;
            double theta = denom > 0.0 ? std::min(1.0, (tau + margin - lam0)/denom) : 1.0;
            for (int e = 0; e < ws.m; ++e) x0[e] = (1.0 - theta)*x_prev[e] + theta*ph1.x[e];
            lam0 = lambda2(ws.laplacian_at(x0));
            if (!(lam0 > tau)) {
                x0 = ph1.x;
                lam0 = achieved;
            }
        }
        // keep the warm start strictly inside the box-simplex
        double room = prob.alpha - sum(lb);
        for (int e = 0; e < ws.m; ++e)
            x0[e] = std::max(x0[e], lb[e] + 1e-12*std::max(1.0, room));
        if (!(prob.alpha - sum(x0) > 0.0)) {
            double shrink = 1.0 - 1e-10;
            for (int e = 0; e < ws.m; ++e) x0[e] = lb[e] + shrink*(x0[e] - lb[e]);
        }

        InteriorOutcome io = interior_minimize(ws, std::move(x0), lb, prob.alpha, tau,
                                               prob.options, nullptr);
        double f = 0.0;
        ws.objective(io.x, &f, nullptr, nullptr);
        pt.feasible = true;
        pt.optimal_value = ws.k*f;
        sweep.points.push_back(pt);
        sweep.psi_max = psi;
        sweep.value_at_psi_max = pt.optimal_value;
        x_prev = io.x;
        lam_prev = lambda2(ws.laplacian_at(io.x));
    }
    // terminal infeasible marker
    SweepPoint inf_pt;
    inf_pt.psi = (steps + 1)*psi_step;
    inf_pt.feasible = false;
    inf_pt.optimal_value = 0.0;
    sweep.points.push_back(inf_pt);
    return sweep;
}

Vec allocate_proportional(const PowerGraph& g, double alpha) {
    if (alpha < 0.0) throw InvalidParameter("alpha must be nonnegative");
    Vec w = g.weights();
    double total = sum(w);
    if (!(total > 0.0)) throw InvalidParameter("total weight must be positive");
    for (double& v : w) v *= alpha/total;
    return w;
}

Vec allocate_uniform(const PowerGraph& g, double alpha) {
    if (alpha < 0.0) throw InvalidParameter("alpha must be nonnegative");
    return Vec(g.edges().size(), alpha/static_cast<double>(g.edges().size()));
}

Vec allocate_random_dirichlet(const PowerGraph& g, double alpha, std::uint64_t seed) {
    if (alpha < 0.0) throw InvalidParameter("alpha must be nonnegative");
    Rng rng(seed);
    Vec x(g.edges().size());
    double total = 0.0;
    for (double& v : x) {
        v = rng.next_exponential();
        total += v;
    }
    for (double& v : x) v *= alpha/total;
    return x;
}

}  // namespace gridsync
