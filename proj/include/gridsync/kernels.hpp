#pragma once

#include <cstddef>

// Data-parallel inner-loop kernels. Scalar reference implementations plus an
// AVX2 backend selected once at startup from CPUID; everything above
// (factorizations, eigensolver, integrators, quadrature) calls through the
// dispatched entry points. SIMD backends reassociate reductions, so results
// may differ from the scalar backend in the last bits; equivalence tests
// bound that difference.

namespace gridsync::kernels {

/// Sum of a[i]*b[i].
double dot(const double* a, const double* b, std::size_t n);

/// y[i] += a*x[i].
void axpy(double a, const double* x, double* y, std::size_t n);

/// x[i] *= a.
void scal(double a, double* x, std::size_t n);

/// Sum of x[i]^2.
double sum_sq(const double* x, std::size_t n);

/// max |x[i]|, 0 for empty input.
double max_abs(const double* x, std::size_t n);

/// Plane rotation: (x[i], y[i]) <- (c*x[i] - s*y[i], s*x[i] + c*y[i]).
void rot(double* x, double* y, double c, double s, std::size_t n);

/// Name of the active backend ("scalar" or "avx2").
const char* backend_name();

/// Force a backend by name for testing; returns false if unavailable.
bool select_backend(const char* name);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
double sum_sq(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
void rot(double* x, double* y, double c, double s, std::size_t n);
}  // namespace scalar

#if defined(GRIDSYNC_WITH_AVX2)
namespace avx2 {
bool supported();
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
double sum_sq(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
void rot(double* x, double* y, double c, double s, std::size_t n);
}  // namespace avx2
#endif

}  // namespace gridsync::kernels
