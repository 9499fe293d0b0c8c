#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gridsync/linalg.hpp"

namespace gridsync {

struct Edge {
    int i = 0;
    int j = 0;
    double weight = 0.0;
};

/// Weighted undirected network with a generator/load node partition.
/// Parallel edges are merged by summing weights; edges are kept in canonical
/// (i<j, lexicographic) order. Generators share one inertia and one damping
/// coefficient.
class PowerGraph {
public:
    PowerGraph(int n, std::vector<Edge> edges, std::vector<int> generators,
               double inertia = 1.0, double damping = 1.0,
               std::optional<Vec> injections = std::nullopt);

    int node_count() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& generators() const { return generators_; }
    std::vector<int> loads() const;
    int generator_count() const { return static_cast<int>(generators_.size()); }
    double inertia() const { return inertia_; }
    double damping() const { return damping_; }
    const std::optional<Vec>& injections() const { return injections_; }

    /// Same topology and partition, new edge weights (canonical edge order).
    PowerGraph with_weights(const Vec& weights) const;

    Vec weights() const;

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<int> generators_;
    double inertia_ = 1.0;
    double damping_ = 1.0;
    std::optional<Vec> injections_;
};

/// Oriented incidence columns: column l is e_sink - e_source.
struct IncidenceMatrix {
    int n = 0;
    std::vector<std::pair<int, int>> arcs;  // (source, sink) per edge
    Vec weights;                            // mirrors PowerGraph edge order

    int edge_count() const { return static_cast<int>(arcs.size()); }
    Matrix dense() const;
    /// (B^T x)_l = x_sink - x_source
    Vec apply_transpose(const Vec& x) const;
};

/// Graph Laplacian L = BWB^T; rejects graphs whose algebraic connectivity is
/// below 1e-8 times the mean degree.
SymMatrix build_laplacian(const PowerGraph& g);

/// Laplacian assembled without the connectivity test (for design iterates).
SymMatrix assemble_laplacian(int n, const std::vector<Edge>& edges);

IncidenceMatrix incidence_matrix(const PowerGraph& g);

/// Schur complement of the interior block; the result is the Laplacian of the
/// reduced graph on `boundary`. Interior block factored with symmetric
/// diagonal pivoting.
SymMatrix kron_reduce(const SymMatrix& laplacian, const std::vector<int>& boundary);

/// L + (beta/n) 11^T, positive definite for beta > 0.
SymMatrix regularized_laplacian(const SymMatrix& laplacian, double beta);

/// (e_i - e_j)^T L_reg^{-1} (e_i - e_j); beta-independent, 0 when i == j.
double effective_resistance(const SymMatrix& laplacian, int i, int j, double beta = 1.0);

/// Orthogonal projector C = EE^T - (1/k) 1_G 1_G^T of rank k-1.
SymMatrix generator_projector(int n, const std::vector<int>& boundary);

/// k * trace(C^T L_reg^{-1}) = (1/2) sum of pairwise boundary resistances.
double total_effective_resistance_reduced(const SymMatrix& laplacian,
                                          const std::vector<int>& boundary,
                                          double beta = 1.0);

/// sqrt(lambda_max(B B^T)) of the unweighted incidence.
double incidence_spectral_norm(const IncidenceMatrix& b);

/// Same, for an arbitrary edge list on n nodes.
double incidence_spectral_norm(int n, const std::vector<std::pair<int, int>>& edges);

}  // namespace gridsync
