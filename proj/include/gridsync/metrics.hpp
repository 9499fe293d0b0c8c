#pragma once

#include "gridsync/linalg.hpp"

namespace gridsync {

/// Modal view of the reduced generator dynamics: eigenpairs of L_red plus the
/// shared generator parameters and the disturbance scale.
struct ModalSystem {
    int k = 0;
    EigenDecomposition eigen;
    double inertia = 1.0;
    double damping = 1.0;
    double sigma = 1.0;

    static ModalSystem from_reduced(const SymMatrix& l_red, double inertia, double damping,
                                    double sigma = 1.0);
};

/// omega(t) split into the common mode and the network-dependent transient.
struct TransientDecomposition {
    Vec time_grid;
    Vec omega_bar;       // scalar series
    Matrix omega_tilde;  // (steps) x k, rows sum to ~0
    Vec modal_coeffs;    // z0 = Vperp^T u0; empty when u0 was not supplied
};

/// ||omega_tilde||_2^2 = (1/2d) sum_{i>=2} (v_i' u0)^2 / lambda_i.
double transient_l2_closed_form(const ModalSystem& sys, const Vec& u0);

/// E[||omega_tilde||_2^2] = sigma^2 R_tot / (2 d k).
double expected_transient_l2(const ModalSystem& sys, double r_tot_reduced);

/// Squared L2 norm of the modal response 1/(m s^2 + d s + lambda): 1/(2 d lambda).
double modal_impulse_l2(double damping, double lambda_i);

/// Time response of the mode: inverse transform of 1/(m s^2 + d s + lambda_i),
/// i.e. the frequency answer to a unit step through this mode. For
/// lambda_i = 0 this is (1 - exp(-d t/m))/d.
Vec modal_step_response(double inertia, double damping, double lambda_i, const Vec& time_grid);

/// Split a frequency series into omega_bar * 1 + omega_tilde. `u0`, when
/// given, fills the modal coefficients z0.
TransientDecomposition decompose_frequency(const Matrix& omega_series,
                                           const EigenDecomposition& eigen,
                                           const Vec& time_grid,
                                           const Vec* u0 = nullptr);

}  // namespace gridsync
