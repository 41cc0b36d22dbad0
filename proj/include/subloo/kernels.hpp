#pragma once

#include <cstddef>

namespace subloo::kernels {

// Reduction kernels over contiguous double spans. Two implementations share
// this table: a scalar reference and an AVX2 variant picked at runtime.
// Both use blocked pairwise accumulation, so a result does not depend on how
// callers partition work across threads (each span is reduced whole).
struct Kernels {
  const char* name;

  // max over a[0..n)
  double (*reduce_max)(const double* a, std::size_t n);
  // max over a[i] + b[i]
  double (*reduce_max2)(const double* a, const double* b, std::size_t n);
  // sum a[i]
  double (*sum)(const double* a, std::size_t n);
  // sum exp(a[i] - shift)
  double (*sum_exp)(const double* a, std::size_t n, double shift);
  // sum exp(a[i] + b[i] - shift)
  double (*sum_exp2)(const double* a, const double* b, std::size_t n,
                     double shift);
  // sum (a[i] - center)^2
  double (*sum_sq_dev)(const double* a, std::size_t n, double center);
  // out[i] = min(a[i], hi)
  void (*clamp_upper)(const double* a, std::size_t n, double hi, double* out);
};

const Kernels& scalar();

// AVX2+FMA variant. Only valid to call when avx2_supported() is true; on
// non-x86 builds the pointers alias the scalar implementation.
const Kernels& avx2();
bool avx2_supported();

// The implementation selected once at startup for this machine.
const Kernels& active();

}  // namespace subloo::kernels
