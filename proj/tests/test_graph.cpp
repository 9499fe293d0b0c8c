#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gridsync/graph.hpp"
#include "oracles.hpp"

using namespace gridsync;

namespace {

PowerGraph path_graph() {
    return PowerGraph(3, {{0, 1, 2.0}, {1, 2, 5.0}}, {0, 1});
}

}  // namespace

TEST_CASE("laplacian of the weighted 3-node path") {
    SymMatrix l = build_laplacian(path_graph());
    double expect[3][3] = {{2, -2, 0}, {-2, 7, -5}, {0, -5, 5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(l(i, j) == doctest::Approx(expect[i][j]));
}

TEST_CASE("laplacian of a single edge") {
    PowerGraph g(2, {{0, 1, 1.0}}, {0});
    SymMatrix l = build_laplacian(g);
    CHECK(l(0, 0) == 1.0);
    CHECK(l(0, 1) == -1.0);
    CHECK(l(1, 1) == 1.0);
}

TEST_CASE("random laplacians: zero row sums and PSD") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 12; ++trial) {
        auto rg = oracles::random_connected_graph(rng, 8);
        SymMatrix l = build_laplacian(rg.graph);
        for (int i = 0; i < l.order(); ++i) {
            double rs = 0.0;
            for (int j = 0; j < l.order(); ++j) rs += l(i, j);
            CHECK(std::abs(rs) <= 1e-10);
        }
        EigenDecomposition e = eigendecompose(l);
        CHECK(e.eigenvalues[0] >= -1e-10);
        CHECK(e.eigenvalues[0] <= 1e-10);
    }
}

TEST_CASE("graph construction validation") {
    CHECK_THROWS_AS(PowerGraph(3, {{0, 0, 1.0}}, {0}), InvalidParameter);   // self-loop
    CHECK_THROWS_AS(PowerGraph(3, {{0, 1, -1.0}}, {0}), InvalidParameter);  // negative weight
    CHECK_THROWS_AS(PowerGraph(3, {{0, 1, 1.0}}, {0}), DisconnectedGraph);  // node 2 isolated
    CHECK_THROWS_AS(PowerGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}}, {0, 1, 2}), InvalidBoundary);
    CHECK_THROWS_AS(PowerGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}}, {}), InvalidBoundary);
    // unbalanced injections
    CHECK_THROWS_AS(PowerGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}}, {0}, 1.0, 1.0, Vec{1.0, 0.0, 0.0}),
                    UnbalancedInjection);
    // parallel edges merge
    PowerGraph g(2, {{0, 1, 1.0}, {1, 0, 2.5}}, {0});
    CHECK(g.edges().size() == 1);
    CHECK(g.edges()[0].weight == doctest::Approx(3.5));
}

TEST_CASE("incidence reproduces the laplacian and ignores orientation") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 8; ++trial) {
        auto rg = oracles::random_connected_graph(rng, 9);
        SymMatrix l = build_laplacian(rg.graph);
        IncidenceMatrix b = incidence_matrix(rg.graph);
        Matrix bd = b.dense();
        const int n = b.n, m = b.edge_count();
        // B W B^T entrywise
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = 0.0;
                for (int e = 0; e < m; ++e) v += bd(i, e)*b.weights[e]*bd(j, e);
                CHECK(std::abs(v - l(i, j)) <= 1e-12*std::max(1.0, l.max_abs()));
            }
        // flipping column signs leaves B W B^T unchanged
        for (int e = 0; e < m; ++e)
            for (int i = 0; i < n; ++i) bd(i, e) = -bd(i, e);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = 0.0;
                for (int e = 0; e < m; ++e) v += bd(i, e)*b.weights[e]*bd(j, e);
                CHECK(std::abs(v - l(i, j)) <= 1e-12*std::max(1.0, l.max_abs()));
            }
    }
}

TEST_CASE("kron reduction of the 7-node example collapses to a triangle") {
    // unit weights, edges {1,6},{6,5},{5,3},{2,3},{1,2},{4,3},{6,7} (1-based)
    std::vector<Edge> edges{{0, 5, 1}, {5, 4, 1}, {4, 2, 1}, {1, 2, 1},
                            {0, 1, 1}, {3, 2, 1}, {5, 6, 1}};
    PowerGraph g(7, edges, {0, 2, 6});
    SymMatrix l = build_laplacian(g);
    SymMatrix red = kron_reduce(l, {0, 2, 6});

    Matrix ref = oracles::brute_schur(l, {0, 2, 6});
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) CHECK(red(a, b) == doctest::Approx(ref(a, b)).epsilon(1e-12));

    // triangle: all off-diagonals negative
    CHECK(red(0, 1) < -1e-6);
    CHECK(red(0, 2) < -1e-6);
    CHECK(red(1, 2) < -1e-6);
}

TEST_CASE("kron reduction drops a dangling leaf") {
    SymMatrix red = kron_reduce(build_laplacian(path_graph()), {0, 1});
    CHECK(red(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(red(0, 1) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(red(1, 1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("kron reduction invariants on random graphs") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        auto rg = oracles::random_connected_graph(rng);
        SymMatrix l = build_laplacian(rg.graph);
        SymMatrix red = kron_reduce(l, rg.boundary);
        const int k = red.order();

        // Laplacian closure: zero row sums, nonpositive off-diagonals, PSD
        for (int a = 0; a < k; ++a) {
            double rs = 0.0;
            for (int b = 0; b < k; ++b) {
                rs += red(a, b);
                if (a != b) CHECK(red(a, b) <= 1e-10);
            }
            CHECK(std::abs(rs) <= 1e-10);
        }
        EigenDecomposition er = eigendecompose(red);
        CHECK(er.eigenvalues[0] >= -1e-10);
        if (k >= 2) CHECK(er.eigenvalues[1] > 1e-9);  // irreducible

        // against the brute Schur complement
        Matrix ref = oracles::brute_schur(l, rg.boundary);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                CHECK(std::abs(red(a, b) - ref(a, b)) <= 1e-9*std::max(1.0, l.max_abs()));

        // eigenvalue interlacing with the full spectrum
        EigenDecomposition ef = eigendecompose(l);
        const int n = l.order();
        for (int i = 0; i < k; ++i) {
            CHECK(er.eigenvalues[i] >= ef.eigenvalues[i] - 1e-9);
            CHECK(er.eigenvalues[i] <= ef.eigenvalues[i + n - k] + 1e-9);
        }
    }
}

TEST_CASE("kron reduction rejects bad boundaries") {
    SymMatrix l = build_laplacian(path_graph());
    CHECK_THROWS_AS(kron_reduce(l, {0, 1, 2}), InvalidBoundary);
    CHECK_THROWS_AS(kron_reduce(l, {}), InvalidBoundary);
    CHECK_THROWS_AS(kron_reduce(l, {0, 0}), InvalidBoundary);
}

TEST_CASE("regularized laplacian spectrum and positivity") {
    SymMatrix l = build_laplacian(path_graph());
    SymMatrix reg = regularized_laplacian(l, 1.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(reg(i, j) == doctest::Approx(l(i, j) + 1.0/3.0).epsilon(1e-14));

    EigenDecomposition el = eigendecompose(l);
    EigenDecomposition er = eigendecompose(reg);
    // spectrum {beta} u {lambda_2..n}
    Vec expected{1.0, el.eigenvalues[1], el.eigenvalues[2]};
    std::sort(expected.begin(), expected.end());
    for (int i = 0; i < 3; ++i)
        CHECK(er.eigenvalues[i] == doctest::Approx(expected[i]).epsilon(1e-10));
    CHECK(er.eigenvalues[0] > 0.0);

    CHECK_THROWS_AS(regularized_laplacian(l, 0.0), InvalidParameter);
    CHECK_THROWS_AS(regularized_laplacian(l, -2.0), InvalidParameter);
}

TEST_CASE("effective resistance on the path graph") {
    SymMatrix l = build_laplacian(path_graph());
    CHECK(effective_resistance(l, 0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(effective_resistance(l, 0, 2) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(effective_resistance(l, 1, 1) == 0.0);
    CHECK(effective_resistance(l, 1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("effective resistance properties on random graphs") {
    std::mt19937_64 rng(63);
    for (int trial = 0; trial < 15; ++trial) {
        auto rg = oracles::random_connected_graph(rng);
        SymMatrix l = build_laplacian(rg.graph);
        const int n = l.order();
        std::uniform_int_distribution<int> vd(0, n - 1);
        int i = vd(rng), j = vd(rng);
        if (i == j) j = (j + 1) % n;

        // beta independence
        double r1 = effective_resistance(l, i, j, 0.1);
        double r2 = effective_resistance(l, i, j, 1.0);
        double r3 = effective_resistance(l, i, j, 10.0);
        CHECK(std::abs(r1 - r2) <= 1e-9*r2);
        CHECK(std::abs(r3 - r2) <= 1e-9*r2);

        // pseudoinverse oracle
        CHECK(r2 == doctest::Approx(oracles::brute_resistance(l, i, j)).epsilon(1e-9));

        // Kron invariance over boundary pairs
        SymMatrix red = kron_reduce(l, rg.boundary);
        for (std::size_t a = 0; a < rg.boundary.size(); ++a)
            for (std::size_t b = a + 1; b < rg.boundary.size(); ++b) {
                double rfull = effective_resistance(l, rg.boundary[a], rg.boundary[b]);
                double rred = effective_resistance(red, static_cast<int>(a), static_cast<int>(b));
                CHECK(std::abs(rfull - rred) <= 1e-9);
            }

        // sqrt(r) satisfies the triangle inequality
        int a = vd(rng);
        double rij = std::sqrt(effective_resistance(l, i, j));
        double ria = std::sqrt(effective_resistance(l, i, a));
        double raj = std::sqrt(effective_resistance(l, a, j));
        CHECK(rij <= ria + raj + 1e-12);
    }
}

TEST_CASE("rayleigh monotonicity") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        auto rg = oracles::random_connected_graph(rng, 9);
        SymMatrix l = build_laplacian(rg.graph);
        const int n = l.order();
        Vec w = rg.graph.weights();
        std::uniform_int_distribution<int> ed(0, static_cast<int>(w.size()) - 1);
        int bump = ed(rng);
        w[bump] += 1.0;
        SymMatrix l2 = build_laplacian(rg.graph.with_weights(w));
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                CHECK(effective_resistance(l2, i, j) <=
                      effective_resistance(l, i, j) + 1e-12);
    }
}

TEST_CASE("generator projector") {
    SymMatrix c = generator_projector(3, {0, 1});
    double expect[3][3] = {{0.5, -0.5, 0}, {-0.5, 0.5, 0}, {0, 0, 0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(c(i, j) == doctest::Approx(expect[i][j]));

    SymMatrix c1 = generator_projector(4, {2});
    CHECK(c1.max_abs() == 0.0);  // k = 1: rank 0

    SymMatrix c6 = generator_projector(30, {0, 1, 12, 21, 22, 26});
    CHECK(c6.trace() == doctest::Approx(5.0).epsilon(1e-12));

    // idempotent, symmetric by construction, annihilates 1
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double sq = 0.0;
            for (int l = 0; l < 3; ++l) sq += c(i, l)*c(l, j);
            CHECK(std::abs(sq - c(i, j)) <= 1e-12);
        }
    for (int i = 0; i < 3; ++i) {
        double rs = 0.0;
        for (int j = 0; j < 3; ++j) rs += c(i, j);
        CHECK(std::abs(rs) <= 1e-12);
    }
}

TEST_CASE("total effective resistance of the reduced graph") {
    SymMatrix l = build_laplacian(path_graph());
    CHECK(total_effective_resistance_reduced(l, {0, 1}) == doctest::Approx(0.5).epsilon(1e-10));

    // sole bridge of weight w between the two boundary nodes
    PowerGraph bridge(4, {{0, 1, 4.0}, {1, 2, 3.0}, {1, 3, 2.0}}, {0, 1});
    SymMatrix lb = build_laplacian(bridge);
    CHECK(total_effective_resistance_reduced(lb, {0, 1}) ==
          doctest::Approx(0.25).epsilon(1e-10));

    // equals the pairwise sum over boundary nodes
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        auto rg = oracles::random_connected_graph(rng);
        SymMatrix lr = build_laplacian(rg.graph);
        double rt = total_effective_resistance_reduced(lr, rg.boundary);
        double pairwise = 0.0;
        for (std::size_t a = 0; a < rg.boundary.size(); ++a)
            for (std::size_t b = a + 1; b < rg.boundary.size(); ++b)
                pairwise += effective_resistance(lr, rg.boundary[a], rg.boundary[b]);
        CHECK(std::abs(rt - pairwise) <= 1e-8*std::max(1.0, pairwise));
        CHECK(rt >= -1e-12);
        // beta independence
        CHECK(total_effective_resistance_reduced(lr, rg.boundary, 0.1) ==
              doctest::Approx(rt).epsilon(1e-9));
    }
}

TEST_CASE("incidence spectral norm") {
    CHECK(incidence_spectral_norm(incidence_matrix(path_graph())) ==
          doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    PowerGraph single(2, {{0, 1, 1.0}}, {0});
    CHECK(incidence_spectral_norm(incidence_matrix(single)) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    PowerGraph k4(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}, {1, 3, 1}, {2, 3, 1}}, {0});
    CHECK(incidence_spectral_norm(incidence_matrix(k4)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("with_weights keeps topology") {
    PowerGraph g = path_graph();
    PowerGraph g2 = g.with_weights({4.0, 10.0});
    CHECK(g2.edges()[0].weight == 4.0);
    CHECK(g2.edges()[1].weight == 10.0);
    CHECK(g2.generators() == g.generators());
    CHECK_THROWS_AS(g.with_weights({1.0}), InvalidParameter);
}
