#include "gridsync/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gridsync/kernels.hpp"

namespace gridsync {

double dot(const Vec& a, const Vec& b) { return kernels::dot(a.data(), b.data(), a.size()); }
double norm2(const Vec& x) { return std::sqrt(kernels::sum_sq(x.data(), x.size())); }
double norm_inf(const Vec& x) { return kernels::max_abs(x.data(), x.size()); }
double sum(const Vec& x) { return std::accumulate(x.begin(), x.end(), 0.0); }
void axpy(double a, const Vec& x, Vec& y) { kernels::axpy(a, x.data(), y.data(), x.size()); }

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vec Matrix::col(int j) const {
    Vec c(rows_);
    for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int l = 0; l < a.cols(); ++l) {
            double ail = a(i, l);
            if (ail != 0.0) kernels::axpy(ail, b.row(l), c.row(i), b.cols());
        }
    }
    return c;
}

Vec operator*(const Matrix& a, const Vec& x) {
    Vec y(a.rows());
    for (int i = 0; i < a.rows(); ++i) y[i] = kernels::dot(a.row(i), x.data(), x.size());
    return y;
}

Matrix SymMatrix::dense() const {
    Matrix m(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
    return m;
}

double SymMatrix::max_abs() const { return kernels::max_abs(data_.data(), data_.size()); }

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    SymMatrix c(a.order());
    for (int i = 0; i < a.order(); ++i)
        for (int j = 0; j <= i; ++j) c.set(i, j, a(i, j) + b(i, j));
    return c;
}

Cholesky cholesky(const SymMatrix& a) {
    const int n = a.order();
    Cholesky f;
    f.L = Matrix(n, n);
    Matrix& L = f.L;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) L(i, j) = a(i, j);
    for (int j = 0; j < n; ++j) {
        double* Lj = L.row(j);
        double djj = Lj[j] - kernels::sum_sq(Lj, j);
        if (!(djj > 0.0) || !std::isfinite(djj)) return f;  // ok stays false
        double ljj = std::sqrt(djj);
        Lj[j] = ljj;
        double inv = 1.0/ljj;
        for (int i = j + 1; i < n; ++i) {
            double* Li = L.row(i);
            Li[j] = (Li[j] - kernels::dot(Li, Lj, j))*inv;
        }
    }
    f.ok = true;
    return f;
}

void Cholesky::solve_in_place(Vec& b) const {
    const int n = L.rows();
    for (int i = 0; i < n; ++i)
        b[i] = (b[i] - kernels::dot(L.row(i), b.data(), i))/L(i, i);
    for (int i = n - 1; i >= 0; --i) {
        double bi = b[i]/L(i, i);
        b[i] = bi;
        // subtract column i of L from remaining rows: strided, do row-wise instead
        for (int j = 0; j < i; ++j) b[j] -= L(i, j)*bi;
    }
}

Vec Cholesky::solve(Vec b) const {
    solve_in_place(b);
    return b;
}

Matrix Cholesky::solve(const Matrix& b) const {
    Matrix x(b.rows(), b.cols());
    Vec col(b.rows());
    for (int j = 0; j < b.cols(); ++j) {
        for (int i = 0; i < b.rows(); ++i) col[i] = b(i, j);
        solve_in_place(col);
        for (int i = 0; i < b.rows(); ++i) x(i, j) = col[i];
    }
    return x;
}

double Cholesky::logdet() const {
    double s = 0.0;
    for (int i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
    return 2.0*s;
}

PivotedLdlt pivoted_ldlt(const SymMatrix& a, double rel_pivot_tol) {
    const int n = a.order();
    PivotedLdlt f;
    Matrix w = a.dense();  // working copy, lower part updated
    f.perm.resize(n);
    std::iota(f.perm.begin(), f.perm.end(), 0);
    f.L = Matrix(n, n);
    f.d.assign(n, 0.0);
    double dmax = 0.0;
    for (int s = 0; s < n; ++s) {
        int p = s;
        for (int i = s + 1; i < n; ++i)
            if (w(i, i) > w(p, p)) p = i;
        if (p != s) {
            std::swap(f.perm[s], f.perm[p]);
            for (int j = 0; j < n; ++j) std::swap(w(s, j), w(p, j));
            for (int i = 0; i < n; ++i) std::swap(w(i, s), w(i, p));
            for (int j = 0; j < s; ++j) std::swap(f.L(s, j), f.L(p, j));
        }
        double piv = w(s, s);
        if (s == 0) dmax = std::max(std::abs(piv), 1e-300);
        if (!(piv > rel_pivot_tol*dmax) || !std::isfinite(piv)) {
            f.condition_estimate = piv > 0.0 ? dmax/piv : std::numeric_limits<double>::infinity();
            return f;  // ok false
        }
        f.d[s] = piv;
        f.L(s, s) = 1.0;
        for (int i = s + 1; i < n; ++i) {
            double lis = w(i, s)/piv;
            f.L(i, s) = lis;
            kernels::axpy(-lis, w.row(s) + s, w.row(i) + s, n - s);
        }
        for (int i = s + 1; i < n; ++i)
            for (int j = s + 1; j < i; ++j) w(j, i) = w(i, j);
    }
    f.condition_estimate = dmax/f.d[n - 1];
    f.ok = true;
    return f;
}

Vec PivotedLdlt::solve(Vec b) const {
    const int n = L.rows();
    Vec pb(n);
    for (int i = 0; i < n; ++i) pb[i] = b[perm[i]];
    for (int i = 0; i < n; ++i) pb[i] -= kernels::dot(L.row(i), pb.data(), i);
    for (int i = 0; i < n; ++i) pb[i] /= d[i];
    for (int i = n - 1; i >= 0; --i) {
        double bi = pb[i];
        for (int j = 0; j < i; ++j) pb[j] -= L(i, j)*bi;
    }
    Vec x(n);
    for (int i = 0; i < n; ++i) x[perm[i]] = pb[i];
    return x;
}

Lu lu_factor(Matrix a) {
    const int n = a.rows();
    Lu f;
    f.perm.resize(n);
    std::iota(f.perm.begin(), f.perm.end(), 0);
    for (int s = 0; s < n; ++s) {
        int p = s;
        double best = std::abs(a(s, s));
        for (int i = s + 1; i < n; ++i) {
            double v = std::abs(a(i, s));
            if (v > best) { best = v; p = i; }
        }
        if (!(best > 0.0) || !std::isfinite(best)) { f.lu = std::move(a); return f; }
        if (p != s) {
            std::swap(f.perm[s], f.perm[p]);
            for (int j = 0; j < n; ++j) std::swap(a(s, j), a(p, j));
        }
        double inv = 1.0/a(s, s);
        for (int i = s + 1; i < n; ++i) {
            double lis = a(i, s)*inv;
            a(i, s) = lis;
            kernels::axpy(-lis, a.row(s) + s + 1, a.row(i) + s + 1, n - s - 1);
        }
    }
    f.lu = std::move(a);
    f.ok = true;
    return f;
}

void Lu::solve_in_place(Vec& b) const {
    const int n = lu.rows();
    Vec pb(n);
    for (int i = 0; i < n; ++i) pb[i] = b[perm[i]];
    for (int i = 0; i < n; ++i) pb[i] -= kernels::dot(lu.row(i), pb.data(), i);
    for (int i = n - 1; i >= 0; --i) {
        double s = pb[i];
        const double* row = lu.row(i);
        for (int j = i + 1; j < n; ++j) s -= row[j]*pb[j];
        pb[i] = s/row[i];
    }
    b = std::move(pb);
}

EigenDecomposition eigendecompose(const SymMatrix& a) {
    const int n = a.order();
    Matrix w = a.dense();
    // Vt rows are eigenvector candidates; transposed at the end.
    Matrix vt = Matrix::identity(n);

    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += kernels::sum_sq(w.row(i), n);
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        EigenDecomposition e;
        e.eigenvalues.assign(n, 0.0);
        e.V = Matrix::identity(n);
        return e;
    }

    auto off_norm = [&]() {
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) s += w(p, q)*w(p, q);
        return std::sqrt(2.0*s);
    };

    const double tol = 1e-15*norm;
    const int max_sweeps = 60;
    int sweep = 0;
    while (off_norm() > tol) {
        if (++sweep > max_sweeps)
            throw NumericalFailure("jacobi eigensolver did not converge");
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = w(p, q);
                if (std::abs(apq) <= 1e-18*norm) continue;
                double app = w(p, p), aqq = w(q, q);
                double theta = (aqq - app)/(2.0*apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0)/
                           (std::abs(theta) + std::sqrt(theta*theta + 1.0));
                double c = 1.0/std::sqrt(t*t + 1.0);
                double s = t*c;
                // rotate rows p and q, fix the 2x2 block, mirror to columns
                kernels::rot(w.row(p), w.row(q), c, s, n);
                w(p, p) = app - t*apq;
                w(q, q) = aqq + t*apq;
                w(p, q) = 0.0;
                w(q, p) = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    w(i, p) = w(p, i);
                    w(i, q) = w(q, i);
                }
                kernels::rot(vt.row(p), vt.row(q), c, s, n);
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return w(i, i) < w(j, j); });

    EigenDecomposition e;
    e.eigenvalues.resize(n);
    e.V = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        int src = order[j];
        e.eigenvalues[j] = w(src, src);
        // canonical sign: largest-magnitude component positive
        const double* v = vt.row(src);
        int imax = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
        double sgn = v[imax] < 0.0 ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i) e.V(i, j) = sgn*v[i];
    }
    return e;
}

double lambda2(const SymMatrix& a) {
    if (a.order() < 2) throw InvalidParameter("lambda2 needs order >= 2");
    return eigendecompose(a).eigenvalues[1];
}

}  // namespace gridsync
