#pragma once

#include <cstddef>

namespace selfalign::kernels::detail {

struct Ops {
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_l2)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double*, double, std::size_t);
  void (*mix)(double*, const double*, double, std::size_t);
  void (*adam_update)(double*, const double*, double*, double*, std::size_t,
                      double, double, double, double, double, double);
};

const Ops& scalar_ops();
// Null when the binary was built without AVX2 support or the CPU lacks it.
const Ops* avx2_ops_or_null();

}  // namespace selfalign::kernels::detail
