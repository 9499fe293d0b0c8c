#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gridsync/dynamics.hpp"
#include "gridsync/sync_cert.hpp"
#include "oracles.hpp"

using namespace gridsync;

namespace {

PowerGraph path_graph() {
    return PowerGraph(3, {{0, 1, 2.0}, {1, 2, 5.0}}, {0, 1});
}

SimulationConfig fast_cfg(double horizon = 5.0, double dt = 0.01) {
    SimulationConfig cfg;
    cfg.dt = dt;
    cfg.horizon = horizon;
    return cfg;
}

double trajectory_sup_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (int s = 0; s < a.rows(); ++s)
        for (int c = 0; c < a.cols(); ++c) m = std::max(m, std::abs(a(s, c) - b(s, c)));
    return m;
}

double trajectory_sup(const Matrix& a) {
    double m = 0.0;
    for (int s = 0; s < a.rows(); ++s)
        for (int c = 0; c < a.cols(); ++c) m = std::max(m, std::abs(a(s, c)));
    return m;
}

}  // namespace

TEST_CASE("load algebra: trivial equilibrium and the arcsin example") {
    PowerGraph g = path_graph();
    Vec zero = solve_load_algebra(g, {0.0, 0.0}, {0, 0, 0});
    REQUIRE(zero.size() == 1);
    CHECK(std::abs(zero[0]) <= 1e-12);

    // load node 2 draws 0.5: 5 sin(d2 - d1) = -0.5
    Vec p{0.5, 0.0, -0.5};
    Vec dl = solve_load_algebra(g, {0.0, 0.0}, p);
    CHECK(dl[0] == doctest::Approx(std::asin(-0.1)).epsilon(1e-10));
}

TEST_CASE("load algebra matches a finite-difference Newton oracle") {
    std::mt19937_64 rng(51);
    std::normal_distribution<double> nd(0.0, 0.2);
    for (int trial = 0; trial < 8; ++trial) {
        auto rg = oracles::random_connected_graph(rng, 8);
        const PowerGraph& g = rg.graph;
        const int n = g.node_count();
        const int k = g.generator_count();
        const int nl = n - k;
        if (nl == 0) continue;
        Vec p(n);
        double mean = 0.0;
        for (double& v : p) {
            v = nd(rng);
            mean += v;
        }
        for (double& v : p) v -= mean/n;
        Vec dgen(k, 0.0);

        Vec dl = solve_load_algebra(g, dgen, p, nullptr, 1e-11, 60);

        // independent oracle: Newton with a numerically differenced Jacobian
        auto residual = [&](const Vec& dload) {
            Vec full(n);
            auto gens = g.generators();
            auto loads = g.loads();
            for (int a = 0; a < k; ++a) full[gens[a]] = dgen[a];
            for (int b = 0; b < nl; ++b) full[loads[b]] = dload[b];
            Vec r(nl);
            for (int b = 0; b < nl; ++b) {
                double flow = 0.0;
                for (const Edge& e : g.edges()) {
                    if (e.i == loads[b]) flow += e.weight*std::sin(full[e.i] - full[e.j]);
                    if (e.j == loads[b]) flow -= e.weight*std::sin(full[e.i] - full[e.j]);
                }
                r[b] = p[loads[b]] - flow;
            }
            return r;
        };
        Vec z(nl, 0.0);
        for (int it = 0; it < 80; ++it) {
            Vec r = residual(z);
            if (norm_inf(r) <= 1e-11) break;
            Matrix jac(nl, nl);
            const double h = 1e-7;
            for (int c = 0; c < nl; ++c) {
                Vec zp = z, zm = z;
                zp[c] += h;
                zm[c] -= h;
                Vec rp = residual(zp), rm = residual(zm);
                for (int r2 = 0; r2 < nl; ++r2) jac(r2, c) = (rm[r2] - rp[r2])/(2.0*h);
            }
            Lu f = lu_factor(jac);
            REQUIRE(f.ok);
            Vec step = r;
            f.solve_in_place(step);
            axpy(1.0, step, z);
        }
        for (int b = 0; b < nl; ++b) CHECK(dl[b] == doctest::Approx(z[b]).epsilon(1e-9));
    }
}

TEST_CASE("equilibrium start stays at rest") {
    PowerGraph g = path_graph();
    Trajectory traj = simulate_dae(g, {0, 0, 0}, {0, 0}, fast_cfg(2.0));
    CHECK(trajectory_sup(traj.omega_gen) <= 1e-12);
    CHECK(trajectory_sup(traj.delta_gen) <= 1e-12);
    CHECK(trajectory_sup(traj.delta_load) <= 1e-12);
    for (auto c : traj.converged) CHECK(c == 1);
}

TEST_CASE("small disturbances follow the linear reduced model") {
    PowerGraph g = path_graph();
    SymMatrix l_red = kron_reduce(build_laplacian(g), g.generators());
    Vec u0{1e-3, -0.4e-3};
    SimulationConfig cfg = fast_cfg(20.0);
    Trajectory dae = simulate_dae(g, {0, 0, 0}, u0, cfg);
    Trajectory lin = simulate_linear_reduced(l_red, 1.0, 1.0, u0, cfg);
    double scale = trajectory_sup(lin.omega_gen);
    CHECK(trajectory_sup_diff(dae.omega_gen, lin.omega_gen) <= 1e-3*scale);
    double dscale = trajectory_sup(lin.delta_gen);
    CHECK(trajectory_sup_diff(dae.delta_gen, lin.delta_gen) <= 1e-3*dscale);
}

TEST_CASE("rk4 order check by step halving") {
    PowerGraph g = path_graph();
    Vec u0{0.3, -0.1};
    auto final_state = [&](double dt) {
        SimulationConfig cfg = fast_cfg(1.0, dt);
        Trajectory t = simulate_dae(g, {0, 0, 0}, u0, cfg);
        int last = t.omega_gen.rows() - 1;
        Vec s{t.delta_gen(last, 0), t.delta_gen(last, 1), t.omega_gen(last, 0),
              t.omega_gen(last, 1)};
        return s;
    };
    Vec ref = final_state(0.0005);
    auto err = [&](double dt) {
        Vec s = final_state(dt);
        double m = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) m = std::max(m, std::abs(s[i] - ref[i]));
        return m;
    };
    double e1 = err(0.02);
    double e2 = err(0.01);
    double ratio = e1/e2;
    // fourth order: ratio ~= 16; the inner Newton tolerance eats a little
    CHECK(ratio > 10.0);
    CHECK(ratio < 24.0);
}

TEST_CASE("implicit trapezoid integrates the same dynamics") {
    PowerGraph g = path_graph();
    Vec u0{0.2, -0.05};
    SimulationConfig r = fast_cfg(5.0, 0.002);
    SimulationConfig t = r;
    t.integrator = Integrator::ImplicitTrapezoid;
    Trajectory rk = simulate_dae(g, {0, 0, 0}, u0, r);
    Trajectory tz = simulate_dae(g, {0, 0, 0}, u0, t);
    CHECK(trajectory_sup_diff(rk.omega_gen, tz.omega_gen) <= 5e-5);

    Trajectory still = simulate_dae(g, {0, 0, 0}, {0, 0}, t);
    CHECK(trajectory_sup(still.omega_gen) <= 1e-12);
}

TEST_CASE("linear reduced model: kernel input and steady frequency offset") {
    PowerGraph g = path_graph();
    SymMatrix l_red = kron_reduce(build_laplacian(g), g.generators());
    SimulationConfig cfg = fast_cfg(30.0);
    double c = 0.7;
    Trajectory traj = simulate_linear_reduced(l_red, 1.0, 1.0, {c, c}, cfg);
    // omega stays exactly on the diagonal and follows the lambda = 0 response
    Vec h = modal_step_response(1.0, 1.0, 0.0, traj.times);
    for (int s = 0; s < traj.omega_gen.rows(); s += 50) {
        CHECK(traj.omega_gen(s, 0) == doctest::Approx(traj.omega_gen(s, 1)).epsilon(1e-12));
        CHECK(traj.omega_gen(s, 0) == doctest::Approx(c*h[s]).epsilon(1e-10));
    }
    // general u0 tends to the mean offset over damping
    Vec u0{1.0, 0.2};
    Trajectory t2 = simulate_linear_reduced(l_red, 1.0, 1.0, u0, cfg);
    int last = t2.omega_gen.rows() - 1;
    double target = (u0[0] + u0[1])/2.0;
    CHECK(t2.omega_gen(last, 0) == doctest::Approx(target).epsilon(1e-8));
    CHECK(t2.omega_gen(last, 1) == doctest::Approx(target).epsilon(1e-8));
}

TEST_CASE("finite horizon norms") {
    // hand-built trajectory: constant omega_tilde = c*(1,-1)/sqrt2 + mean 2.0
    const int steps = 100;
    const double dt = 0.1, c = 0.8;
    Trajectory traj;
    traj.times.resize(steps + 1);
    traj.omega_gen = Matrix(steps + 1, 2);
    traj.delta_gen = Matrix(steps + 1, 2);
    traj.delta_load = Matrix(steps + 1, 0);
    traj.converged.assign(steps + 1, 1);
    const double inv_sqrt2 = 1.0/std::sqrt(2.0);
    for (int s = 0; s <= steps; ++s) {
        traj.times[s] = s*dt;
        traj.omega_gen(s, 0) = 2.0 + c*inv_sqrt2;
        traj.omega_gen(s, 1) = 2.0 - c*inv_sqrt2;
    }
    double horizon = steps*dt;
    CHECK(finite_horizon_l2(traj, NormComponent::OmegaTilde) ==
          doctest::Approx(c*std::sqrt(horizon)).epsilon(1e-10));
    // zero trajectory
    for (int s = 0; s <= steps; ++s) {
        traj.omega_gen(s, 0) = 0.0;
        traj.omega_gen(s, 1) = 0.0;
    }
    CHECK(finite_horizon_l2(traj, NormComponent::Omega) == 0.0);
}

TEST_CASE("norm decomposition identity") {
    PowerGraph g = path_graph();
    SimulationConfig cfg = fast_cfg(20.0);
    Vec u0{0.5, -0.1};
    Trajectory traj = simulate_dae(g, {0, 0, 0}, u0, cfg);
    double full = finite_horizon_l2(traj, NormComponent::Omega);
    double tilde = finite_horizon_l2(traj, NormComponent::OmegaTilde);
    // k * trapezoid of omega_bar^2
    const int k = 2;
    Vec bar_sq(traj.times.size());
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        double mean = 0.5*(traj.omega_gen(static_cast<int>(s), 0) +
                           traj.omega_gen(static_cast<int>(s), 1));
        bar_sq[s] = mean*mean;
    }
    double bar_term = k*oracles::trapezoid(bar_sq, cfg.dt);
    CHECK(full*full == doctest::Approx(tilde*tilde + bar_term).epsilon(1e-8));
}

TEST_CASE("balanced steps settle, unbalanced steps drift to the mean offset") {
    PowerGraph g = path_graph();
    SimulationConfig cfg = fast_cfg(40.0);
    Trajectory balanced = simulate_dae(g, {0, 0, 0}, {0.2, -0.2}, cfg);
    int last = balanced.omega_gen.rows() - 1;
    CHECK(std::abs(balanced.omega_gen(last, 0)) <= 1e-6);
    CHECK(std::abs(balanced.omega_gen(last, 1)) <= 1e-6);

    Trajectory drifting = simulate_dae(g, {0, 0, 0}, {0.3, 0.1}, cfg);
    CHECK(drifting.omega_gen(last, 0) == doctest::Approx(0.2).epsilon(1e-5));
    CHECK(drifting.omega_gen(last, 1) == doctest::Approx(0.2).epsilon(1e-5));
}

TEST_CASE("flow conservation at the settled equilibrium") {
    PowerGraph g = path_graph();
    SimulationConfig cfg = fast_cfg(40.0);
    Vec u0{0.2, -0.2};
    Trajectory traj = simulate_dae(g, {0, 0, 0}, u0, cfg);
    int last = traj.delta_gen.rows() - 1;
    Vec full{traj.delta_gen(last, 0), traj.delta_gen(last, 1), traj.delta_load(last, 0)};
    Vec flows(3, 0.0);
    for (const Edge& e : g.edges()) {
        double f = e.weight*std::sin(full[e.i] - full[e.j]);
        flows[e.i] += f;
        flows[e.j] -= f;
    }
    CHECK(std::abs(flows[0] + flows[1] + flows[2]) <= 1e-9);
    // generator flows absorb the balanced step; the load node stays balanced
    CHECK(flows[0] == doctest::Approx(0.2).epsilon(1e-5));
    CHECK(std::abs(flows[2]) <= 1e-8);
}

TEST_CASE("monte carlo: identical variants tie") {
    PowerGraph g = path_graph();
    SimulationConfig cfg = fast_cfg(10.0);
    MonteCarloReport rep =
        monte_carlo_compare({{"a", g}, {"b", g}}, 8, 1.0, 99, cfg);
    CHECK(rep.mean_reduction_pct[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(rep.win_rate[1] == doctest::Approx(0.5));
    CHECK(rep.excluded == 0);
}

TEST_CASE("monte carlo determinism and sample hashing") {
    PowerGraph g = path_graph();
    PowerGraph g2 = g.with_weights({4.0, 5.0});
    SimulationConfig cfg = fast_cfg(10.0);
    MonteCarloReport a = monte_carlo_compare({{"x", g2}, {"y", g}}, 6, 1.0, 4242, cfg);
    MonteCarloReport b = monte_carlo_compare({{"x", g2}, {"y", g}}, 6, 1.0, 4242, cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t s = 0; s < a.samples.size(); ++s) {
        CHECK(a.samples[s].u0_hash == b.samples[s].u0_hash);
        CHECK(a.samples[s].norm_tilde == b.samples[s].norm_tilde);
    }
    CHECK(a.mean_reduction_pct[1] == b.mean_reduction_pct[1]);
    // different seed, different samples
    MonteCarloReport c = monte_carlo_compare({{"x", g2}, {"y", g}}, 6, 1.0, 4243, cfg);
    CHECK(a.samples[0].u0_hash != c.samples[0].u0_hash);
    // a strictly better-coupled generator edge should win on most samples
    CHECK(a.win_rate[1] >= 0.5);
}

TEST_CASE("monte carlo validates shared parameters") {
    PowerGraph g = path_graph();
    PowerGraph other(3, {{0, 1, 2.0}, {1, 2, 5.0}}, {0, 2});
    SimulationConfig cfg = fast_cfg(2.0);
    CHECK_THROWS_AS(monte_carlo_compare({{"a", g}, {"b", other}}, 2, 1.0, 1, cfg),
                    InvalidParameter);
}

TEST_CASE("steady-state cohesion report") {
    PowerGraph g = path_graph();
    CHECK(steady_state_cohesion_report(g, {0, 0, 0}, {0, 0}) == doctest::Approx(0.0).scale(1.0));

    // the balanced part of u0 = (u, -u) loads the generator edge only
    double u = 0.6;
    double report = steady_state_cohesion_report(g, {0, 0, 0}, {u, -u});
    CHECK(report == doctest::Approx(std::asin(u/2.0)).epsilon(1e-9));

    // pure common-mode u0 leaves the angles at zero
    CHECK(steady_state_cohesion_report(g, {0, 0, 0}, {0.5, 0.5}) ==
          doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("dae config validation") {
    PowerGraph g = path_graph();
    SimulationConfig bad = fast_cfg();
    bad.dt = 0.0;
    CHECK_THROWS_AS(simulate_dae(g, {0, 0, 0}, {0, 0}, bad), InvalidParameter);
    SimulationConfig loose = fast_cfg();
    loose.newton_tol = 1e-6;
    CHECK_THROWS_AS(simulate_dae(g, {0, 0, 0}, {0, 0}, loose), InvalidParameter);
    CHECK_THROWS_AS(simulate_dae(g, {0.5, 0, 0}, {0, 0}, fast_cfg()), UnbalancedInjection);
}
