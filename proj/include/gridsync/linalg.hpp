#pragma once

#include <vector>

#include "gridsync/errors.hpp"

namespace gridsync {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& x);
double norm_inf(const Vec& x);
double sum(const Vec& x);
/// y += a*x
void axpy(double a, const Vec& x, Vec& y);

/// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows)*cols, fill) {}

    static Matrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i)*cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i)*cols_ + j]; }
    double* row(int i) { return data_.data() + static_cast<std::size_t>(i)*cols_; }
    const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i)*cols_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }

    Vec col(int j) const;
    Matrix transposed() const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Vec operator*(const Matrix& a, const Vec& x);

/// Dense symmetric matrix; writes keep both triangles equal so symmetry is
/// exact by construction.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int n, double fill = 0.0)
        : n_(n), data_(static_cast<std::size_t>(n)*n, fill) {}

    int order() const { return n_; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i)*n_ + j]; }
    void set(int i, int j, double v) {
        data_[static_cast<std::size_t>(i)*n_ + j] = v;
        data_[static_cast<std::size_t>(j)*n_ + i] = v;
    }
    void add(int i, int j, double v) {
        data_[static_cast<std::size_t>(i)*n_ + j] += v;
        if (i != j) data_[static_cast<std::size_t>(j)*n_ + i] += v;
    }
    const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i)*n_; }
    const double* data() const { return data_.data(); }

    Matrix dense() const;
    double max_abs() const;
    double trace() const;

private:
    int n_ = 0;
    std::vector<double> data_;
};

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);

/// A = L L^T for symmetric positive definite A. `ok` is false on breakdown.
struct Cholesky {
    Matrix L;
    bool ok = false;

    void solve_in_place(Vec& b) const;
    Vec solve(Vec b) const;
    /// Solves A X = B column by column.
    Matrix solve(const Matrix& b) const;
    double logdet() const;
};
Cholesky cholesky(const SymMatrix& a);

/// P A P^T = L D L^T with symmetric diagonal pivoting; for positive
/// semidefinite A the pivot order is by largest remaining diagonal, which
/// also yields a cheap condition estimate d_max/d_min.
struct PivotedLdlt {
    Matrix L;
    Vec d;
    std::vector<int> perm;
    bool ok = false;
    double condition_estimate = 0.0;

    Vec solve(Vec b) const;
};
PivotedLdlt pivoted_ldlt(const SymMatrix& a, double rel_pivot_tol = 1e-13);

/// PA = LU with partial pivoting for general square systems.
struct Lu {
    Matrix lu;
    std::vector<int> perm;
    bool ok = false;

    void solve_in_place(Vec& b) const;
};
Lu lu_factor(Matrix a);

struct EigenDecomposition {
    Vec eigenvalues;  // ascending
    Matrix V;         // orthonormal columns, V(:,i) pairs with eigenvalues[i]
};

/// Cyclic Jacobi eigensolver for dense symmetric matrices. Deterministic;
/// throws NumericalFailure if the off-diagonal mass fails to vanish.
EigenDecomposition eigendecompose(const SymMatrix& a);

/// Second-smallest eigenvalue.
double lambda2(const SymMatrix& a);

}  // namespace gridsync
