#include "selfalign/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <string_view>

#include "kernels_detail.hpp"
#include "selfalign/errors.hpp"

namespace selfalign::kernels {
namespace {

const detail::Ops* g_ops = nullptr;
Backend g_backend = Backend::scalar;

const detail::Ops* avx2_table() {
#if defined(SELFALIGN_HAVE_AVX2)
  return detail::avx2_ops_or_null();
#else
  return nullptr;
#endif
}

void resolve() {
  if (g_ops) return;
  const detail::Ops* avx = avx2_table();
  const char* env = std::getenv("SELFALIGN_BACKEND");
  std::string_view want = env ? std::string_view(env) : std::string_view();
  if (want == "scalar") {
    avx = nullptr;
  } else if (want == "avx2" && !avx) {
    throw ConfigError("SELFALIGN_BACKEND=avx2 requested but AVX2 is unavailable");
  } else if (!want.empty() && want != "avx2") {
    throw ConfigError("unknown SELFALIGN_BACKEND value; expected scalar or avx2");
  }
  if (avx) {
    g_ops = avx;
    g_backend = Backend::avx2;
  } else {
    g_ops = &detail::scalar_ops();
    g_backend = Backend::scalar;
  }
}

inline const detail::Ops& ops() {
  resolve();
  return *g_ops;
}

}  // namespace

Backend active() {
  resolve();
  return g_backend;
}

bool avx2_available() { return avx2_table() != nullptr; }

void force(Backend b) {
  if (b == Backend::avx2) {
    const detail::Ops* avx = avx2_table();
    if (!avx) throw ConfigError("cannot force avx2 backend: unavailable");
    g_ops = avx;
  } else {
    g_ops = &detail::scalar_ops();
  }
  g_backend = b;
}

const char* backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

double dot(const double* a, const double* b, std::size_t n) {
  return ops().dot(a, b, n);
}

double squared_l2(const double* a, const double* b, std::size_t n) {
  return ops().squared_l2(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  ops().axpy(alpha, x, y, n);
}

void scale(double* x, double alpha, std::size_t n) {
  ops().scale(x, alpha, n);
}

void mix(double* target, const double* online, double m, std::size_t n) {
  ops().mix(target, online, m, n);
}

void adam_update(double* p, const double* g, double* m1, double* m2,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bias1, double bias2) {
  ops().adam_update(p, g, m1, m2, n, lr, beta1, beta2, eps, bias1, bias2);
}

double nrm2(const double* a, std::size_t n) {
  return std::sqrt(ops().dot(a, a, n));
}

void matvec(const double* m, std::size_t rows, std::size_t cols,
            const double* v, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = ops().dot(m + r * cols, v, cols);
  }
}

void ger(double alpha, const double* g, std::size_t rows, const double* v,
         std::size_t cols, double* m) {
  for (std::size_t r = 0; r < rows; ++r) {
    ops().axpy(alpha * g[r], v, m + r * cols, cols);
  }
}

}  // namespace selfalign::kernels
