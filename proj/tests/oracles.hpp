#pragma once

// Test-only oracles, independent of the library solve paths: Gauss-Jordan
// inversion, brute-force Schur complements and resistances, quadrature, a
// plain RK4 scalar integrator, central differences, and seeded random graphs.

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "gridsync/graph.hpp"

namespace oracles {

using gridsync::Edge;
using gridsync::Matrix;
using gridsync::PowerGraph;
using gridsync::SymMatrix;
using gridsync::Vec;

// full-pivot-free Gauss-Jordan inverse; fine for the small well-conditioned
// test matrices and independent of the library factorizations
inline Matrix gj_inverse(const Matrix& a) {
    const int n = a.rows();
    Matrix w = a;
    Matrix inv = Matrix::identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(w(r, col)) > std::abs(w(piv, col))) piv = r;
        if (std::abs(w(piv, col)) < 1e-14) throw std::runtime_error("gj: singular");
        if (piv != col)
            for (int c = 0; c < n; ++c) {
                std::swap(w(piv, c), w(col, c));
                std::swap(inv(piv, c), inv(col, c));
            }
        double d = w(col, col);
        for (int c = 0; c < n; ++c) {
            w(col, c) /= d;
            inv(col, c) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = w(r, col);
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) {
                w(r, c) -= f*w(col, c);
                inv(r, c) -= f*inv(col, c);
            }
        }
    }
    return inv;
}

inline Matrix dense_of(const SymMatrix& s) { return s.dense(); }

// Schur complement L_GG - L_GI L_II^{-1} L_IG by dense elimination
inline Matrix brute_schur(const SymMatrix& l, const std::vector<int>& boundary) {
    const int n = l.order();
    std::vector<char> isb(n, 0);
    for (int v : boundary) isb[v] = 1;
    std::vector<int> interior;
    for (int v = 0; v < n; ++v)
        if (!isb[v]) interior.push_back(v);
    const int k = static_cast<int>(boundary.size());
    const int ni = static_cast<int>(interior.size());
    Matrix lii(ni, ni), lig(ni, k), lgi(k, ni), lgg(k, k);
    for (int a = 0; a < ni; ++a) {
        for (int b = 0; b < ni; ++b) lii(a, b) = l(interior[a], interior[b]);
        for (int b = 0; b < k; ++b) lig(a, b) = l(interior[a], boundary[b]);
    }
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < ni; ++b) lgi(a, b) = l(boundary[a], interior[b]);
        for (int b = 0; b < k; ++b) lgg(a, b) = l(boundary[a], boundary[b]);
    }
    Matrix inv = gj_inverse(lii);
    Matrix prod = lgi*(inv*lig);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) lgg(a, b) -= prod(a, b);
    return lgg;
}

// r_ij via the pseudoinverse identity L^+ = (L + 11'/n)^{-1} - 11'/n
inline double brute_resistance(const SymMatrix& l, int i, int j) {
    const int n = l.order();
    Matrix shifted(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) shifted(a, b) = l(a, b) + 1.0/n;
    Matrix inv = gj_inverse(shifted);
    return inv(i, i) + inv(j, j) - 2.0*inv(i, j);
}

struct RandomGraph {
    PowerGraph graph;
    std::vector<int> boundary;
};

// connected graph: random spanning tree plus extra edges, weights in
// [0.5, 3]; boundary is a random proper subset
inline RandomGraph random_connected_graph(std::mt19937_64& rng, int max_n = 12) {
    std::uniform_int_distribution<int> nd(3, max_n);
    const int n = nd(rng);
    std::uniform_real_distribution<double> wd(0.5, 3.0);
    std::vector<Edge> edges;
    for (int v = 1; v < n; ++v) {
        std::uniform_int_distribution<int> pd(0, v - 1);
        edges.push_back({pd(rng), v, wd(rng)});
    }
    std::uniform_int_distribution<int> extra(0, n);
    int more = extra(rng);
    std::uniform_int_distribution<int> vd(0, n - 1);
    for (int e = 0; e < more; ++e) {
        int i = vd(rng), j = vd(rng);
        if (i != j) edges.push_back({i, j, wd(rng)});
    }
    std::uniform_int_distribution<int> kd(1, n - 1);
    int k = kd(rng);
    std::vector<int> perm(n);
    for (int v = 0; v < n; ++v) perm[v] = v;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> boundary(perm.begin(), perm.begin() + k);
    std::sort(boundary.begin(), boundary.end());
    return {PowerGraph(n, std::move(edges), boundary), boundary};
}

inline double trapezoid(const Vec& values, double dt) {
    double acc = 0.0;
    for (std::size_t s = 0; s < values.size(); ++s) {
        double w = (s == 0 || s + 1 == values.size()) ? 0.5 : 1.0;
        acc += w*values[s];
    }
    return acc*dt;
}

// classic RK4 for x'' = f(t, x, x'), used as the modal-response oracle
inline void rk4_second_order(const std::function<double(double, double, double)>& accel,
                             double dt, int steps, Vec& x_out, Vec& v_out) {
    double x = 0.0, v = 0.0;
    x_out.assign(steps + 1, 0.0);
    v_out.assign(steps + 1, 0.0);
    for (int s = 0; s < steps; ++s) {
        double t = s*dt;
        double k1x = v, k1v = accel(t, x, v);
        double k2x = v + 0.5*dt*k1v, k2v = accel(t + 0.5*dt, x + 0.5*dt*k1x, v + 0.5*dt*k1v);
        double k3x = v + 0.5*dt*k2v, k3v = accel(t + 0.5*dt, x + 0.5*dt*k2x, v + 0.5*dt*k2v);
        double k4x = v + dt*k3v, k4v = accel(t + dt, x + dt*k3x, v + dt*k3v);
        x += dt/6.0*(k1x + 2*k2x + 2*k3x + k4x);
        v += dt/6.0*(k1v + 2*k2v + 2*k3v + k4v);
        x_out[s + 1] = x;
        v_out[s + 1] = v;
    }
}

inline Vec central_difference(const std::function<double(const Vec&)>& f, const Vec& x,
                              double h = 1e-6) {
    Vec g(x.size());
    Vec xp = x, xm = x;
    for (std::size_t e = 0; e < x.size(); ++e) {
        xp[e] = x[e] + h;
        xm[e] = x[e] - h;
        g[e] = (f(xp) - f(xm))/(2.0*h);
        xp[e] = x[e];
        xm[e] = x[e];
    }
    return g;
}

}  // namespace oracles
