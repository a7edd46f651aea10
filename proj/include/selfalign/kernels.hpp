#pragma once

#include <cstddef>

namespace selfalign::kernels {

enum class Backend { scalar, avx2 };

// Active backend. Resolved once on first use: AVX2 when the CPU supports it,
// unless the SELFALIGN_BACKEND environment variable ("scalar" | "avx2")
// overrides the choice.
Backend active();
bool avx2_available();
// Test hook. Throws ConfigError when the requested backend is unavailable.
void force(Backend b);
const char* backend_name(Backend b);

double dot(const double* a, const double* b, std::size_t n);
double squared_l2(const double* a, const double* b, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
// target = m * target + (1 - m) * online
void mix(double* target, const double* online, double m, std::size_t n);
// Bias-corrected Adam on one flat tensor. bias1/bias2 are (1 - beta^t).
void adam_update(double* p, const double* g, double* m1, double* m2,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bias1, double bias2);

// Composed helpers (built on the primitives above).
double nrm2(const double* a, std::size_t n);
// out[r] = dot(m[r,:], v), row-major m
void matvec(const double* m, std::size_t rows, std::size_t cols,
            const double* v, double* out);
// m += alpha * g * v^T, row-major m
void ger(double alpha, const double* g, std::size_t rows, const double* v,
         std::size_t cols, double* m);

}  // namespace selfalign::kernels
