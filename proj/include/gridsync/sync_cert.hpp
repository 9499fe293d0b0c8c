#pragma once

#include <utility>
#include <vector>

#include "gridsync/graph.hpp"
#include "gridsync/linalg.hpp"

namespace gridsync {

/// Cohesion requirement: arc length gamma, injection-ball radius psi, and the
/// edge set E-hat = E u E_c the incremental norm ranges over.
struct CohesionSpec {
    double gamma = 0.0;
    double psi = 0.0;
    int n = 0;
    std::vector<std::pair<int, int>> edge_set_hat;

    static CohesionSpec make(double gamma, double psi, int n,
                             const std::vector<std::pair<int, int>>& edges,
                             const std::vector<std::pair<int, int>>& candidate_edges = {});
};

struct Certificate {
    enum class Kind { Exact, Spectral, Conductance };
    Kind kind = Kind::Exact;
    bool holds = false;
    /// Left side minus right side of the governing inequality; >= 0 certifies.
    double margin = 0.0;
    double threshold = 0.0;
};

/// max over listed edges of |x_i - x_j|.
double incremental_inf_norm(const Vec& x, const std::vector<std::pair<int, int>>& edges);

/// ||L^+ p||_{E-hat,inf} <= sin(gamma).
Certificate exact_cohesion_check(const SymMatrix& laplacian, const Vec& p,
                                 const CohesionSpec& spec);

/// ||B-hat||_2 ||p||_2 / sin(gamma) <= lambda2.
Certificate spectral_sufficient_check(const SymMatrix& laplacian, double p_norm,
                                      const CohesionSpec& spec);

/// tau = psi ||B-hat||_2 / sin(gamma); the LMI holds at x iff lambda2 >= tau.
double lmi_threshold(const CohesionSpec& spec);

/// min over node pairs of 1/r_ij >= ||B-hat||_2 ||p||_2 / (2 sin(gamma)).
Certificate conductance_sufficient_check(const SymMatrix& laplacian, double p_norm,
                                         const CohesionSpec& spec);

struct SyncState {
    Vec angles;                    // 1' angles = 0
    double incremental_norm = 0.0; // ||angles||_{E,inf} over the graph edges
    double residual = 0.0;
    int iterations = 0;
};

/// Damped Newton solve of the balance equations p_i = sum_j a_ij sin(d_i - d_j),
/// restricted to the branch with all edge angle differences inside (-pi/2, pi/2).
SyncState solve_sync_state(const PowerGraph& g, const Vec& p);

}  // namespace gridsync
