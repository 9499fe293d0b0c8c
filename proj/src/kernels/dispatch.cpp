#include "gridsync/kernels.hpp"

#include <cstring>

namespace gridsync::kernels {

namespace {

struct Backend {
    const char* name;
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scal)(double, double*, std::size_t);
    double (*sum_sq)(const double*, std::size_t);
    double (*max_abs)(const double*, std::size_t);
    void (*rot)(double*, double*, double, double, std::size_t);
};

constexpr Backend kScalar{"scalar", scalar::dot, scalar::axpy, scalar::scal,
                          scalar::sum_sq, scalar::max_abs, scalar::rot};

#if defined(GRIDSYNC_WITH_AVX2)
constexpr Backend kAvx2{"avx2", avx2::dot, avx2::axpy, avx2::scal,
                        avx2::sum_sq, avx2::max_abs, avx2::rot};
#endif

const Backend* detect() {
#if defined(GRIDSYNC_WITH_AVX2)
    if (avx2::supported()) return &kAvx2;
#endif
    return &kScalar;
}

const Backend* g_active = detect();

}  // namespace

double dot(const double* a, const double* b, std::size_t n) { return g_active->dot(a, b, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { g_active->axpy(a, x, y, n); }
void scal(double a, double* x, std::size_t n) { g_active->scal(a, x, n); }
double sum_sq(const double* x, std::size_t n) { return g_active->sum_sq(x, n); }
double max_abs(const double* x, std::size_t n) { return g_active->max_abs(x, n); }
void rot(double* x, double* y, double c, double s, std::size_t n) { g_active->rot(x, y, c, s, n); }

const char* backend_name() { return g_active->name; }

bool select_backend(const char* name) {
    if (std::strcmp(name, "scalar") == 0) {
        g_active = &kScalar;
        return true;
    }
#if defined(GRIDSYNC_WITH_AVX2)
    if (std::strcmp(name, "avx2") == 0 && avx2::supported()) {
        g_active = &kAvx2;
        return true;
    }
#endif
    return false;
}

}  // namespace gridsync::kernels
