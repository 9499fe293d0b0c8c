#include "gridsync/sync_cert.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gridsync/kernels.hpp"

namespace gridsync {

CohesionSpec CohesionSpec::make(double gamma, double psi, int n,
                                const std::vector<std::pair<int, int>>& edges,
                                const std::vector<std::pair<int, int>>& candidate_edges) {
    if (!(gamma > 0.0) || !(gamma < M_PI/2))
        throw InvalidParameter("gamma must lie strictly inside (0, pi/2)");
    if (psi < 0.0) throw InvalidParameter("psi must be nonnegative");
    CohesionSpec spec;
    spec.gamma = gamma;
    spec.psi = psi;
    spec.n = n;
    std::set<std::pair<int, int>> merged;
    auto insert = [&](const std::vector<std::pair<int, int>>& list) {
        for (auto [i, j] : list) {
            if (i == j || i < 0 || j < 0 || i >= n || j >= n)
                throw InvalidParameter("bad edge in cohesion spec");
            merged.insert({std::min(i, j), std::max(i, j)});
        }
    };
    insert(edges);
    insert(candidate_edges);
    spec.edge_set_hat.assign(merged.begin(), merged.end());
    if (spec.edge_set_hat.empty()) throw InvalidParameter("empty edge set");
    return spec;
}

double incremental_inf_norm(const Vec& x, const std::vector<std::pair<int, int>>& edges) {
    double m = 0.0;
    for (auto [i, j] : edges) m = std::max(m, std::abs(x[i] - x[j]));
    return m;
}

Certificate exact_cohesion_check(const SymMatrix& laplacian, const Vec& p,
                                 const CohesionSpec& spec) {
    if (static_cast<int>(p.size()) != laplacian.order())
        throw InvalidParameter("injection length mismatch");
    double scale = std::max(1.0, norm_inf(p));
    if (std::abs(sum(p)) > 1e-9*scale)
        throw UnbalancedInjection("exact check requires balanced injections");
    Cholesky f = cholesky(regularized_laplacian(laplacian, 1.0));
    if (!f.ok) throw NumericalFailure("regularized Laplacian is not positive definite");
    Vec z = f.solve(p);  // equals L^+ p for balanced p
    double val = incremental_inf_norm(z, spec.edge_set_hat);
    Certificate cert;
    cert.kind = Certificate::Kind::Exact;
    cert.threshold = std::sin(spec.gamma);
    cert.margin = cert.threshold - val;
    cert.holds = cert.margin >= -1e-12;
    return cert;
}

Certificate spectral_sufficient_check(const SymMatrix& laplacian, double p_norm,
                                      const CohesionSpec& spec) {
    if (p_norm < 0.0) throw InvalidParameter("p_norm must be nonnegative");
    double bnorm = incidence_spectral_norm(spec.n, spec.edge_set_hat);
    double tau = bnorm*p_norm/std::sin(spec.gamma);
    double lam2 = lambda2(laplacian);
    Certificate cert;
    cert.kind = Certificate::Kind::Spectral;
    cert.threshold = tau;
    cert.margin = lam2 - tau;
    cert.holds = cert.margin >= -1e-12;
    return cert;
}

double lmi_threshold(const CohesionSpec& spec) {
    double bnorm = incidence_spectral_norm(spec.n, spec.edge_set_hat);
    return spec.psi*bnorm/std::sin(spec.gamma);
}

Certificate conductance_sufficient_check(const SymMatrix& laplacian, double p_norm,
                                         const CohesionSpec& spec) {
    if (p_norm < 0.0) throw InvalidParameter("p_norm must be nonnegative");
    const int n = laplacian.order();
    Cholesky f = cholesky(regularized_laplacian(laplacian, 1.0));
    if (!f.ok) throw NumericalFailure("regularized Laplacian is not positive definite");
    // Y = L_reg^{-1}; r_ij = Y_ii + Y_jj - 2 Y_ij over all pairs
    Matrix y = f.solve(Matrix::identity(n));
    double r_max = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            r_max = std::max(r_max, y(i, i) + y(j, j) - 2.0*y(i, j));
    double bnorm = incidence_spectral_norm(spec.n, spec.edge_set_hat);
    Certificate cert;
    cert.kind = Certificate::Kind::Conductance;
    cert.threshold = bnorm*p_norm/(2.0*std::sin(spec.gamma));
    cert.margin = 1.0/r_max - cert.threshold;
    cert.holds = cert.margin >= -1e-12;
    return cert;
}

SyncState solve_sync_state(const PowerGraph& g, const Vec& p) {
    const int n = g.node_count();
    if (static_cast<int>(p.size()) != n) throw InvalidParameter("injection length mismatch");
    double scale = std::max(1.0, norm_inf(p));
    if (std::abs(sum(p)) > 1e-9*scale)
        throw UnbalancedInjection("synchronized state requires balanced injections");

    const auto& edges = g.edges();
    const double cap = 0.999*M_PI/2;

    auto edge_norm = [&](const Vec& d) {
        double m = 0.0;
        for (const Edge& e : edges) m = std::max(m, std::abs(d[e.i] - d[e.j]));
        return m;
    };
    auto center = [&](Vec& d) {
        double mean = sum(d)/n;
        for (double& v : d) v -= mean;
    };
    auto residual_of = [&](const Vec& d, Vec& r) {
        r = p;
        for (const Edge& e : edges) {
            double flow = e.weight*std::sin(d[e.i] - d[e.j]);
            r[e.i] -= flow;
            r[e.j] += flow;
        }
    };

    SymMatrix l0 = assemble_laplacian(n, edges);
    double reg = std::max(1.0, l0.trace()/n);

    // start at the linearized solution, pulled inside the branch region
    Cholesky f0 = cholesky(regularized_laplacian(l0, reg));
    if (!f0.ok) throw NumericalFailure("Laplacian factorization failed");
    Vec delta = f0.solve(p);
    center(delta);
    double en = edge_norm(delta);
    if (en >= 0.95*cap) {
        double shrink = 0.95*cap/en;
        kernels::scal(shrink, delta.data(), delta.size());
    }

    const int max_iter = 100;
    const double tol = 1e-10;
    Vec r(n);
    SyncState out;
    for (int it = 0; it <= max_iter; ++it) {
        residual_of(delta, r);
        double rn = norm_inf(r);
        if (rn <= tol) {
            out.angles = delta;
            out.incremental_norm = edge_norm(delta);
            out.residual = rn;
            out.iterations = it;
            return out;
        }
        if (it == max_iter) break;

        SymMatrix lc(n);
        for (const Edge& e : edges) {
            double w = e.weight*std::cos(delta[e.i] - delta[e.j]);
            lc.add(e.i, e.i, w);
            lc.add(e.j, e.j, w);
            lc.add(e.i, e.j, -w);
        }
        Vec step;
        Cholesky fc = cholesky(regularized_laplacian(lc, reg));
        if (fc.ok) {
            step = fc.solve(r);
        } else {
            Lu flu = lu_factor(regularized_laplacian(lc, reg).dense());
            if (!flu.ok) throw NoSynchronizedState("Jacobian factorization failed");
            step = r;
            flu.solve_in_place(step);
        }
        center(step);

        // largest step keeping every edge difference inside the branch region
        double a = 1.0;
        for (const Edge& e : edges) {
            double d0 = delta[e.i] - delta[e.j];
            double ds = step[e.i] - step[e.j];
            if (ds == 0.0) continue;
            double room = (ds > 0.0 ? cap - d0 : -cap - d0)/ds;
            if (room > 0.0) a = std::min(a, room);
        }
        a = std::min(a, 1.0);
        if (!(a > 1e-12)) throw NoSynchronizedState("step collapsed at the branch boundary");
        axpy(a, step, delta);
        center(delta);
    }
    throw NoSynchronizedState("Newton did not reach the residual tolerance");
}

}  // namespace gridsync
