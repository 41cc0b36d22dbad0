#include "subloo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace subloo::kernels {
namespace {

constexpr std::size_t kBlock = 128;

// Recursive pairwise reduction over [i0, i1), splitting on block boundaries.
// Keeps rounding error O(log n) and the summation order fixed.
template <class BlockFn>
double pairwise(std::size_t i0, std::size_t i1, const BlockFn& block) {
  const std::size_t n = i1 - i0;
  if (n <= kBlock) return block(i0, i1);
  std::size_t mid = i0 + ((n / 2 + kBlock - 1) / kBlock) * kBlock;
  if (mid >= i1) mid = i0 + n / 2;
  return pairwise(i0, mid, block) + pairwise(mid, i1, block);
}

double s_reduce_max(const double* a, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = a[i] > m ? a[i] : m;
  return m;
}

double s_reduce_max2(const double* a, const double* b, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = a[i] + b[i];
    m = v > m ? v : m;
  }
  return m;
}

double s_sum(const double* a, std::size_t n) {
  return pairwise(0, n, [a](std::size_t i0, std::size_t i1) {
    double acc = 0.0;
    for (std::size_t i = i0; i < i1; ++i) acc += a[i];
    return acc;
  });
}

double s_sum_exp(const double* a, std::size_t n, double shift) {
  return pairwise(0, n, [a, shift](std::size_t i0, std::size_t i1) {
    double acc = 0.0;
    for (std::size_t i = i0; i < i1; ++i) acc += std::exp(a[i] - shift);
    return acc;
  });
}

double s_sum_exp2(const double* a, const double* b, std::size_t n,
                  double shift) {
  return pairwise(0, n, [a, b, shift](std::size_t i0, std::size_t i1) {
    double acc = 0.0;
    for (std::size_t i = i0; i < i1; ++i) acc += std::exp(a[i] + b[i] - shift);
    return acc;
  });
}

double s_sum_sq_dev(const double* a, std::size_t n, double center) {
  return pairwise(0, n, [a, center](std::size_t i0, std::size_t i1) {
    double acc = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
      const double d = a[i] - center;
      acc += d * d;
    }
    return acc;
  });
}

void s_clamp_upper(const double* a, std::size_t n, double hi, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] < hi ? a[i] : hi;
}

}  // namespace

const Kernels& scalar() {
  static const Kernels k = {
      "scalar",    s_reduce_max, s_reduce_max2, s_sum,
      s_sum_exp,   s_sum_exp2,   s_sum_sq_dev,  s_clamp_upper,
  };
  return k;
}

}  // namespace subloo::kernels
