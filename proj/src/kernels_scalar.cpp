#include <cmath>
#include <cstddef>

#include "kernels_detail.hpp"

namespace selfalign::kernels::detail {
namespace {

double s_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double s_squared_l2(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void s_axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void s_scale(double* x, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void s_mix(double* target, const double* online, double m, std::size_t n) {
  double w = 1.0 - m;
  for (std::size_t i = 0; i < n; ++i) target[i] = m * target[i] + w * online[i];
}

void s_adam_update(double* p, const double* g, double* m1, double* m2,
                   std::size_t n, double lr, double beta1, double beta2,
                   double eps, double bias1, double bias2) {
  double w1 = 1.0 - beta1;
  double w2 = 1.0 - beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m1[i] = beta1 * m1[i] + w1 * g[i];
    m2[i] = beta2 * m2[i] + w2 * (g[i] * g[i]);
    double mhat = m1[i] / bias1;
    double vhat = m2[i] / bias2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{s_dot, s_squared_l2, s_axpy, s_scale, s_mix,
                       s_adam_update};
  return ops;
}

}  // namespace selfalign::kernels::detail
