#include "gridsync/metrics.hpp"

#include <cmath>
#include <string>

namespace gridsync {

ModalSystem ModalSystem::from_reduced(const SymMatrix& l_red, double inertia, double damping,
                                      double sigma) {
    if (!(inertia > 0.0) || !(damping > 0.0))
        throw InvalidParameter("inertia and damping must be positive");
    if (sigma < 0.0) throw InvalidParameter("sigma must be nonnegative");
    ModalSystem sys;
    sys.k = l_red.order();
    sys.eigen = eigendecompose(l_red);
    sys.inertia = inertia;
    sys.damping = damping;
    sys.sigma = sigma;
    double scale = std::max(1.0, l_red.max_abs());
    if (std::abs(sys.eigen.eigenvalues[0]) > 1e-8*scale)
        throw DegenerateSpectrum("reduced Laplacian kernel eigenvalue is not ~0");
    double align = 0.0;
    for (int i = 0; i < sys.k; ++i) align += sys.eigen.V(i, 0);
    if (std::abs(std::abs(align)/std::sqrt(double(sys.k)) - 1.0) > 1e-8)
        throw DegenerateSpectrum("kernel eigenvector is not the constant vector");
    return sys;
}

double transient_l2_closed_form(const ModalSystem& sys, const Vec& u0) {
    if (static_cast<int>(u0.size()) != sys.k) throw InvalidParameter("u0 length mismatch");
    double total = 0.0;
    for (int i = 1; i < sys.k; ++i) {
        double lam = sys.eigen.eigenvalues[i];
        if (!(lam > 0.0)) throw DegenerateSpectrum("nonpositive eigenvalue " + std::to_string(lam));
        double proj = 0.0;
        for (int a = 0; a < sys.k; ++a) proj += sys.eigen.V(a, i)*u0[a];
        total += proj*proj/lam;
    }
    return total/(2.0*sys.damping);
}

double expected_transient_l2(const ModalSystem& sys, double r_tot_reduced) {
    if (r_tot_reduced < 0.0) throw InvalidParameter("R_tot must be nonnegative");
    return sys.sigma*sys.sigma*r_tot_reduced/(2.0*sys.damping*sys.k);
}

double modal_impulse_l2(double damping, double lambda_i) {
    if (!(damping > 0.0)) throw InvalidParameter("damping must be positive");
    if (!(lambda_i > 0.0)) throw DegenerateSpectrum("modal norm needs lambda > 0");
    return 1.0/(2.0*damping*lambda_i);
}

Vec modal_step_response(double inertia, double damping, double lambda_i, const Vec& time_grid) {
    if (!(inertia > 0.0) || !(damping > 0.0))
        throw InvalidParameter("inertia and damping must be positive");
    if (lambda_i < 0.0) throw InvalidParameter("lambda must be nonnegative");
    const double m = inertia, d = damping;
    Vec h(time_grid.size());
    if (lambda_i == 0.0) {
        for (std::size_t s = 0; s < time_grid.size(); ++s)
            h[s] = (1.0 - std::exp(-d*time_grid[s]/m))/d;
        return h;
    }
    const double disc = d*d - 4.0*m*lambda_i;
    const double scale = d*d + 4.0*m*lambda_i;
    if (disc > 1e-9*scale) {
        const double root = std::sqrt(disc);
        const double r1 = (-d + root)/(2.0*m);
        const double r2 = (-d - root)/(2.0*m);
        for (std::size_t s = 0; s < time_grid.size(); ++s) {
            double t = time_grid[s];
            h[s] = (std::exp(r1*t) - std::exp(r2*t))/(m*(r1 - r2));
        }
    } else if (disc < -1e-9*scale) {
        const double sig = d/(2.0*m);
        const double wd = std::sqrt(-disc)/(2.0*m);
        for (std::size_t s = 0; s < time_grid.size(); ++s) {
            double t = time_grid[s];
            h[s] = std::exp(-sig*t)*std::sin(wd*t)/(m*wd);
        }
    } else {  // critically damped
        const double r = -d/(2.0*m);
        for (std::size_t s = 0; s < time_grid.size(); ++s) {
            double t = time_grid[s];
            h[s] = t*std::exp(r*t)/m;
        }
    }
    return h;
}

TransientDecomposition decompose_frequency(const Matrix& omega_series,
                                           const EigenDecomposition& eigen,
                                           const Vec& time_grid,
                                           const Vec* u0) {
    const int k = omega_series.cols();
    if (static_cast<int>(eigen.eigenvalues.size()) != k)
        throw InvalidParameter("eigendecomposition size mismatch");
    if (static_cast<int>(time_grid.size()) != omega_series.rows())
        throw InvalidParameter("time grid length mismatch");
    TransientDecomposition out;
    out.time_grid = time_grid;
    out.omega_bar.resize(omega_series.rows());
    out.omega_tilde = Matrix(omega_series.rows(), k);
    for (int s = 0; s < omega_series.rows(); ++s) {
        const double* row = omega_series.row(s);
        double mean = 0.0;
        for (int a = 0; a < k; ++a) mean += row[a];
        mean /= k;
        out.omega_bar[s] = mean;
        for (int a = 0; a < k; ++a) out.omega_tilde(s, a) = row[a] - mean;
    }
    if (u0) {
        if (static_cast<int>(u0->size()) != k) throw InvalidParameter("u0 length mismatch");
        out.modal_coeffs.resize(k - 1);
        for (int i = 1; i < k; ++i) {
            double proj = 0.0;
            for (int a = 0; a < k; ++a) proj += eigen.V(a, i)*(*u0)[a];
            out.modal_coeffs[i - 1] = proj;
        }
    }
    return out;
}

}  // namespace gridsync
