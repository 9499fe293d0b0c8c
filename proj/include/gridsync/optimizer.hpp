#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gridsync/graph.hpp"
#include "gridsync/sync_cert.hpp"

namespace gridsync {

struct SolverOptions {
    double stationarity_tol = 1e-6;
    double feasibility_tol = 1e-8;
    long max_iterations = 50000;
    // interior-point continuation for the lambda2-constrained problems
    double barrier_t_initial = 1.0;
    double barrier_t_final = 1e9;
    double barrier_t_multiplier = 20.0;
    int newton_iteration_cap = 200;
    double newton_decrement_tol = 1e-9;
    int log_stride = 25;
};

/// One budget-allocation instance over candidate edges of the base graph.
struct DesignProblem {
    explicit DesignProblem(PowerGraph g) : base_graph(std::move(g)) {}

    PowerGraph base_graph;
    /// Empty means E_c = E.
    std::vector<std::pair<int, int>> candidate_edges;
    double alpha = 0.0;
    double beta = 1.0;
    std::optional<CohesionSpec> cohesion;
    /// Rewiring relaxation: allow negative updates down to -a_e.
    bool allow_negative = false;
    /// Empty means 0 per edge, or -a_e when allow_negative is set.
    Vec lower_bounds;
    SolverOptions options;

    std::vector<std::pair<int, int>> resolved_candidates() const;
    Vec resolved_lower_bounds() const;
};

struct IterationRecord {
    long iteration = 0;
    double objective = 0.0;
    double stationarity = 0.0;
    double barrier_t = 0.0;
};

struct OptimizationResult {
    enum class Status { Converged, NotConverged, Infeasible };
    Status status = Status::NotConverged;
    Vec x_star;
    double objective = 0.0;      // trace(C^T L_reg(x*)^{-1})
    double r_tot_reduced = 0.0;  // k * objective
    double lambda2 = 0.0;
    double stationarity = 0.0;
    double feasibility_violation = 0.0;
    long iterations = 0;
    double budget_used = 0.0;
    /// Rewiring: some weight was driven to its lower bound (an edge removed).
    bool lower_bound_active = false;
    std::vector<IterationRecord> log;
};

/// f(x) = trace(C^T L(x)_reg^{-1}) and its gradient
/// df/dx_e = -b_e^T Y^{-1} C Y^{-1} b_e (always <= 0).
std::pair<double, Vec> objective_and_gradient(const DesignProblem& prob, const Vec& x);

/// Budget allocation without the cohesion constraint: projected gradient with
/// backtracking on the box-simplex {x >= lb, 1'x <= alpha}.
OptimizationResult solve_p0(const DesignProblem& prob);

/// Adds the LMI lambda2(L(x)) >= tau; solved by a primal interior-point
/// method (log-det barrier, damped Newton, t-continuation).
OptimizationResult solve_p2(const DesignProblem& prob);

/// Rewiring relaxation: alpha = 0, x_e >= -a_e, cohesion constraint required.
OptimizationResult solve_rewire(const DesignProblem& prob);

struct SweepPoint {
    double psi = 0.0;
    bool feasible = false;
    double optimal_value = 0.0;  // R_tot(G_red(x*))
};

struct PsiSweepResult {
    double psi_max = 0.0;
    double lambda2_max = 0.0;      // max algebraic connectivity over the feasible set
    double value_at_psi_max = 0.0; // R_tot at the last feasible step
    std::vector<SweepPoint> points;
};

/// Largest multiple of psi_step for which the constrained problem stays
/// feasible, plus the curve of optimal values (one solve per step).
PsiSweepResult max_feasible_psi(const DesignProblem& prob_template, double gamma,
                                double psi_step = 1e-3);

/// x_e = w_e * alpha / sum(w).
Vec allocate_proportional(const PowerGraph& g, double alpha);
/// x_e = alpha / |E|.
Vec allocate_uniform(const PowerGraph& g, double alpha);
/// x = v * alpha, v ~ Dirichlet(1,...,1); deterministic in the seed.
Vec allocate_random_dirichlet(const PowerGraph& g, double alpha, std::uint64_t seed);

/// Euclidean projection onto {x : x >= lb, 1'x <= alpha} (sorting-based).
Vec project_box_simplex(Vec y, const Vec& lb, double alpha);

}  // namespace gridsync
