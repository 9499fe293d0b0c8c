#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridsync/graph.hpp"
#include "gridsync/metrics.hpp"

namespace gridsync {

enum class Integrator { Rk4SemiExplicit, ImplicitTrapezoid };

struct SimulationConfig {
    double dt = 0.01;
    double horizon = 50.0;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    Integrator integrator = Integrator::Rk4SemiExplicit;
};

/// Time-gridded states. Rows are time steps; generator columns follow the
/// graph's generator order, load columns its load order.
struct Trajectory {
    Vec times;
    Matrix delta_gen;
    Matrix omega_gen;
    Matrix delta_load;  // zero columns for the reduced linear model
    std::vector<std::uint8_t> converged;
};

/// Newton solve of the load balance 0 = p_i - sum_j a_ij sin(d_i - d_j) for
/// the load angles, generator angles held fixed.
Vec solve_load_algebra(const PowerGraph& g, const Vec& delta_gen, const Vec& p,
                       const Vec* initial_guess = nullptr, double tol = 1e-10,
                       int max_iter = 50);

/// Swing-equation DAE from rest (delta = 0, omega = 0) with the step
/// disturbance u0 added to the generator injections at t = 0.
Trajectory simulate_dae(const PowerGraph& g, const Vec& p, const Vec& u0,
                        const SimulationConfig& cfg);

/// Exact modal solution of the reduced linear model on the grid.
Trajectory simulate_linear_reduced(const SymMatrix& l_red, double inertia, double damping,
                                   const Vec& u0, const SimulationConfig& cfg);

enum class NormComponent { Omega, OmegaTilde };

/// sqrt of the trapezoid integral of the squared norm over the grid; for
/// OmegaTilde the per-step generator mean is removed first.
double finite_horizon_l2(const Trajectory& traj, NormComponent component);

struct MonteCarloSample {
    std::uint64_t u0_hash = 0;
    bool ok = false;
    Vec norm_tilde;  // per variant
    Vec norm_omega;  // per variant
};

struct MonteCarloReport {
    std::uint64_t seed = 0;
    int sample_count = 0;
    double sigma = 1.0;
    std::vector<std::string> variant_names;
    std::vector<MonteCarloSample> samples;
    int excluded = 0;
    /// Versus variant 0, indexed like variant_names (entry 0 is zero).
    Vec mean_reduction_pct;
    Vec win_rate;
    /// Same summaries on the raw omega norms.
    Vec mean_reduction_pct_omega;
};

/// Simulates every variant on identical u0 ~ N(0, sigma^2 I) step samples and
/// summarizes variant 0 against each other variant. Deterministic in `seed`.
MonteCarloReport monte_carlo_compare(const std::vector<std::pair<std::string, PowerGraph>>& variants,
                                     int n_samples, double sigma, std::uint64_t seed,
                                     const SimulationConfig& cfg);

/// Incremental steady-state angle norm after the step disturbance u0 is
/// absorbed: injections p plus the generator-balanced component of u0.
double steady_state_cohesion_report(const PowerGraph& g, const Vec& p, const Vec& u0);

}  // namespace gridsync
