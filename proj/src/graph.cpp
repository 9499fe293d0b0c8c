#include "gridsync/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace gridsync {

namespace {

// union-find over positive-weight edges; a structural pre-check, the
// authoritative connectivity test is the lambda2 tolerance in build_laplacian
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

PowerGraph::PowerGraph(int n, std::vector<Edge> edges, std::vector<int> generators,
                       double inertia, double damping, std::optional<Vec> injections)
    : n_(n), inertia_(inertia), damping_(damping), injections_(std::move(injections)) {
    if (n < 2) throw InvalidParameter("graph needs at least 2 nodes");
    if (!(inertia > 0.0) || !(damping > 0.0))
        throw InvalidParameter("inertia and damping must be positive");

    std::map<std::pair<int, int>, double> merged;
    for (const Edge& e : edges) {
        if (e.i == e.j) throw InvalidParameter("self-loop on node " + std::to_string(e.i));
        if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
            throw InvalidParameter("edge endpoint out of range");
        if (e.weight < 0.0)
            throw InvalidParameter("negative edge weight at construction");
        merged[{std::min(e.i, e.j), std::max(e.i, e.j)}] += e.weight;
    }
    edges_.reserve(merged.size());
    for (const auto& [key, w] : merged) edges_.push_back({key.first, key.second, w});

    std::sort(generators.begin(), generators.end());
    generators.erase(std::unique(generators.begin(), generators.end()), generators.end());
    for (int v : generators)
        if (v < 0 || v >= n) throw InvalidBoundary("generator index out of range");
    if (generators.empty() || static_cast<int>(generators.size()) >= n)
        throw InvalidBoundary("generator set must satisfy 1 <= k < n");
    generators_ = std::move(generators);

    if (injections_) {
        if (static_cast<int>(injections_->size()) != n)
            throw InvalidParameter("injection vector length mismatch");
        double imbalance = std::abs(sum(*injections_));
        double scale = std::max(1.0, norm_inf(*injections_));
        if (imbalance > 1e-9*scale)
            throw UnbalancedInjection("injections must sum to zero");
    }

    UnionFind uf(n);
    for (const Edge& e : edges_)
        if (e.weight > 0.0) uf.unite(e.i, e.j);
    int root = uf.find(0);
    for (int v = 1; v < n; ++v)
        if (uf.find(v) != root) throw DisconnectedGraph("graph is not connected");
}

std::vector<int> PowerGraph::loads() const {
    std::vector<int> out;
    out.reserve(n_ - generators_.size());
    std::size_t g = 0;
    for (int v = 0; v < n_; ++v) {
        if (g < generators_.size() && generators_[g] == v) {
            ++g;
        } else {
            out.push_back(v);
        }
    }
    return out;
}

PowerGraph PowerGraph::with_weights(const Vec& weights) const {
    if (weights.size() != edges_.size())
        throw InvalidParameter("weight vector length mismatch");
    std::vector<Edge> e = edges_;
    for (std::size_t l = 0; l < e.size(); ++l) e[l].weight = weights[l];
    return PowerGraph(n_, std::move(e), generators_, inertia_, damping_, injections_);
}

Vec PowerGraph::weights() const {
    Vec w(edges_.size());
    for (std::size_t l = 0; l < edges_.size(); ++l) w[l] = edges_[l].weight;
    return w;
}

Matrix IncidenceMatrix::dense() const {
    Matrix b(n, edge_count());
    for (int l = 0; l < edge_count(); ++l) {
        b(arcs[l].first, l) = -1.0;
        b(arcs[l].second, l) = 1.0;
    }
    return b;
}

Vec IncidenceMatrix::apply_transpose(const Vec& x) const {
    Vec y(arcs.size());
    for (std::size_t l = 0; l < arcs.size(); ++l)
        y[l] = x[arcs[l].second] - x[arcs[l].first];
    return y;
}

SymMatrix assemble_laplacian(int n, const std::vector<Edge>& edges) {
    SymMatrix l(n);
    for (const Edge& e : edges) {
        l.add(e.i, e.i, e.weight);
        l.add(e.j, e.j, e.weight);
        l.add(e.i, e.j, -e.weight);
    }
    return l;
}

SymMatrix build_laplacian(const PowerGraph& g) {
    SymMatrix l = assemble_laplacian(g.node_count(), g.edges());
    double mean_degree = l.trace()/g.node_count();
    double lam2 = lambda2(l);
    if (lam2 <= 1e-8*mean_degree)
        throw DisconnectedGraph("algebraic connectivity below tolerance");
    return l;
}

IncidenceMatrix incidence_matrix(const PowerGraph& g) {
    IncidenceMatrix b;
    b.n = g.node_count();
    b.arcs.reserve(g.edges().size());
    b.weights.reserve(g.edges().size());
    for (const Edge& e : g.edges()) {
        b.arcs.emplace_back(e.i, e.j);
        b.weights.push_back(e.weight);
    }
    return b;
}

SymMatrix kron_reduce(const SymMatrix& laplacian, const std::vector<int>& boundary) {
    const int n = laplacian.order();
    const int k = static_cast<int>(boundary.size());
    if (k == 0 || k >= n) throw InvalidBoundary("boundary must be a proper nonempty subset");
    std::vector<char> is_boundary(n, 0);
    for (int v : boundary) {
        if (v < 0 || v >= n) throw InvalidBoundary("boundary index out of range");
        if (is_boundary[v]) throw InvalidBoundary("duplicate boundary index");
        is_boundary[v] = 1;
    }
    std::vector<int> interior;
    interior.reserve(n - k);
    for (int v = 0; v < n; ++v)
        if (!is_boundary[v]) interior.push_back(v);

    const int ni = static_cast<int>(interior.size());
    SymMatrix lii(ni);
    for (int a = 0; a < ni; ++a)
        for (int b = 0; b <= a; ++b) lii.set(a, b, laplacian(interior[a], interior[b]));
    PivotedLdlt f = pivoted_ldlt(lii);
    if (!f.ok)
        throw NumericalFailure("interior block is numerically singular", f.condition_estimate);

    // S = L_GG - L_GI * L_II^{-1} * L_IG, column by column
    Matrix s(k, k);
    Vec col(ni);
    for (int b = 0; b < k; ++b) {
        for (int a = 0; a < ni; ++a) col[a] = laplacian(interior[a], boundary[b]);
        Vec z = f.solve(col);
        for (int a = 0; a < k; ++a) {
            double dot_ai = 0.0;
            for (int t = 0; t < ni; ++t) dot_ai += laplacian(boundary[a], interior[t])*z[t];
            s(a, b) = laplacian(boundary[a], boundary[b]) - dot_ai;
        }
    }
    SymMatrix red(k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b <= a; ++b) red.set(a, b, 0.5*(s(a, b) + s(b, a)));
    return red;
}

SymMatrix regularized_laplacian(const SymMatrix& laplacian, double beta) {
    if (!(beta > 0.0)) throw InvalidParameter("beta must be positive");
    const int n = laplacian.order();
    SymMatrix r(n);
    const double shift = beta/n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) r.set(i, j, laplacian(i, j) + shift);
    return r;
}

double effective_resistance(const SymMatrix& laplacian, int i, int j, double beta) {
    const int n = laplacian.order();
    if (i < 0 || i >= n || j < 0 || j >= n) throw InvalidParameter("node index out of range");
    if (i == j) return 0.0;
    Cholesky f = cholesky(regularized_laplacian(laplacian, beta));
    if (!f.ok) throw NumericalFailure("regularized Laplacian is not positive definite");
    Vec rhs(n, 0.0);
    rhs[i] = 1.0;
    rhs[j] = -1.0;
    f.solve_in_place(rhs);
    return rhs[i] - rhs[j];
}

SymMatrix generator_projector(int n, const std::vector<int>& boundary) {
    const int k = static_cast<int>(boundary.size());
    if (k == 0) throw InvalidBoundary("boundary must be nonempty");
    SymMatrix c(n);
    for (int v : boundary) {
        if (v < 0 || v >= n) throw InvalidBoundary("boundary index out of range");
        c.set(v, v, 1.0);
    }
    const double inv_k = 1.0/k;
    for (int a : boundary)
        for (int b : boundary) c.set(a, b, c(a, b) - inv_k);
    return c;
}

double total_effective_resistance_reduced(const SymMatrix& laplacian,
                                          const std::vector<int>& boundary,
                                          double beta) {
    const int n = laplacian.order();
    const int k = static_cast<int>(boundary.size());
    if (k == 0 || k > n) throw InvalidBoundary("bad boundary size");
    Cholesky f = cholesky(regularized_laplacian(laplacian, beta));
    if (!f.ok) throw NumericalFailure("regularized Laplacian is not positive definite");
    // trace(C^T Y) = sum_b Y_bb - (1/k) sum_{a,b} Y_ab over boundary
    double diag_sum = 0.0, block_sum = 0.0;
    Vec rhs(n);
    for (int b : boundary) {
        std::fill(rhs.begin(), rhs.end(), 0.0);
        rhs[b] = 1.0;
        f.solve_in_place(rhs);
        diag_sum += rhs[b];
        for (int a : boundary) block_sum += rhs[a];
    }
    return k*(diag_sum - block_sum/k);
}

double incidence_spectral_norm(const IncidenceMatrix& b) {
    return incidence_spectral_norm(b.n, b.arcs);
}

double incidence_spectral_norm(int n, const std::vector<std::pair<int, int>>& edges) {
    SymMatrix bbt(n);
    for (const auto& [i, j] : edges) {
        bbt.add(i, i, 1.0);
        bbt.add(j, j, 1.0);
        bbt.add(i, j, -1.0);
    }
    EigenDecomposition e = eigendecompose(bbt);
    return std::sqrt(std::max(0.0, e.eigenvalues.back()));
}

}  // namespace gridsync
