#include "kernels_detail.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace selfalign::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(s, s);
  return _mm_cvtsd_f64(_mm_add_sd(s, swapped));
}

double v_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double r = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double v_squared_l2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d, d, acc0);
  }
  double r = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    r += d * d;
  }
  return r;
}

// The elementwise kernels below avoid FMA on purpose: each lane then performs
// the same rounding steps as the scalar reference, so results match bit for
// bit and reproducibility does not depend on the dispatch decision.

void v_axpy(double alpha, const double* x, double* y, std::size_t n) {
  __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void v_scale(double* x, double alpha, std::size_t n) {
  __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

void v_mix(double* target, const double* online, double m, std::size_t n) {
  double w = 1.0 - m;
  __m256d vm = _mm256_set1_pd(m);
  __m256d vw = _mm256_set1_pd(w);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(vm, _mm256_loadu_pd(target + i));
    __m256d o = _mm256_mul_pd(vw, _mm256_loadu_pd(online + i));
    _mm256_storeu_pd(target + i, _mm256_add_pd(t, o));
  }
  for (; i < n; ++i) target[i] = m * target[i] + w * online[i];
}

void v_adam_update(double* p, const double* g, double* m1, double* m2,
                   std::size_t n, double lr, double beta1, double beta2,
                   double eps, double bias1, double bias2) {
  double w1 = 1.0 - beta1;
  double w2 = 1.0 - beta2;
  __m256d vb1 = _mm256_set1_pd(beta1);
  __m256d vb2 = _mm256_set1_pd(beta2);
  __m256d vw1 = _mm256_set1_pd(w1);
  __m256d vw2 = _mm256_set1_pd(w2);
  __m256d vlr = _mm256_set1_pd(lr);
  __m256d veps = _mm256_set1_pd(eps);
  __m256d vib1 = _mm256_set1_pd(bias1);
  __m256d vib2 = _mm256_set1_pd(bias2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vg = _mm256_loadu_pd(g + i);
    __m256d vm1 = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m1 + i)),
                                _mm256_mul_pd(vw1, vg));
    __m256d vm2 = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(m2 + i)),
                                _mm256_mul_pd(vw2, _mm256_mul_pd(vg, vg)));
    _mm256_storeu_pd(m1 + i, vm1);
    _mm256_storeu_pd(m2 + i, vm2);
    __m256d mhat = _mm256_div_pd(vm1, vib1);
    __m256d vhat = _mm256_div_pd(vm2, vib2);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    m1[i] = beta1 * m1[i] + w1 * g[i];
    m2[i] = beta2 * m2[i] + w2 * (g[i] * g[i]);
    double mhat = m1[i] / bias1;
    double vhat = m2[i] / bias2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const Ops* avx2_ops_or_null() {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) {
    return nullptr;
  }
  static const Ops ops{v_dot, v_squared_l2, v_axpy, v_scale, v_mix,
                       v_adam_update};
  return &ops;
}

}  // namespace selfalign::kernels::detail

#else

namespace selfalign::kernels::detail {
const Ops* avx2_ops_or_null() { return nullptr; }
}  // namespace selfalign::kernels::detail

#endif
