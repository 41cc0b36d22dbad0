#include "subloo/kernels.hpp"

#if defined(SUBLOO_WITH_AVX2) && (defined(__x86_64__) || defined(_M_X64))

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>

namespace subloo::kernels {
namespace {

constexpr std::size_t kBlock = 128;

template <class BlockFn>
double pairwise(std::size_t i0, std::size_t i1, const BlockFn& block) {
  const std::size_t n = i1 - i0;
  if (n <= kBlock) return block(i0, i1);
  std::size_t mid = i0 + ((n / 2 + kBlock - 1) / kBlock) * kBlock;
  if (mid >= i1) mid = i0 + n / 2;
  return pairwise(i0, mid, block) + pairwise(mid, i1, block);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// exp over 4 lanes: Cody-Waite range reduction, Cephes rational kernel,
// two-step 2^k scaling so deep-negative arguments decay gracefully through
// the subnormal range instead of wrapping.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);

  x = _mm256_min_pd(x, _mm256_set1_pd(709.4));
  x = _mm256_max_pd(x, _mm256_set1_pd(-745.5));

  const __m256d k =
      _mm256_round_pd(_mm256_mul_pd(x, log2e),
                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, c1, x);
  r = _mm256_fnmadd_pd(k, c2, r);
  const __m256d rr = _mm256_mul_pd(r, r);

  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);

  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000005e0));

  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

  const __m128i k32 = _mm256_cvtpd_epi32(k);
  const __m128i k1 = _mm_srai_epi32(k32, 1);
  const __m128i k2 = _mm_sub_epi32(k32, k1);
  const __m256i bias = _mm256_set1_epi64x(1023);
  const __m256d s1 = _mm256_castsi256_pd(_mm256_slli_epi64(
      _mm256_add_epi64(_mm256_cvtepi32_epi64(k1), bias), 52));
  const __m256d s2 = _mm256_castsi256_pd(_mm256_slli_epi64(
      _mm256_add_epi64(_mm256_cvtepi32_epi64(k2), bias), 52));
  return _mm256_mul_pd(_mm256_mul_pd(e, s1), s2);
}

double v_reduce_max(const double* a, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vm = _mm256_loadu_pd(a);
    for (i = 4; i + 4 <= n; i += 4)
      vm = _mm256_max_pd(vm, _mm256_loadu_pd(a + i));
    m = hmax(vm);
  }
  for (; i < n; ++i) m = a[i] > m ? a[i] : m;
  return m;
}

double v_reduce_max2(const double* a, const double* b, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vm = _mm256_add_pd(_mm256_loadu_pd(a), _mm256_loadu_pd(b));
    for (i = 4; i + 4 <= n; i += 4)
      vm = _mm256_max_pd(
          vm, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    m = hmax(vm);
  }
  for (; i < n; ++i) {
    const double v = a[i] + b[i];
    m = v > m ? v : m;
  }
  return m;
}

double v_sum(const double* a, std::size_t n) {
  return pairwise(0, n, [a](std::size_t i0, std::size_t i1) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = i0;
    for (; i + 4 <= i1; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s = hsum(acc);
    for (; i < i1; ++i) s += a[i];
    return s;
  });
}

double v_sum_exp(const double* a, std::size_t n, double shift) {
  const __m256d vs = _mm256_set1_pd(shift);
  return pairwise(0, n, [a, vs, shift](std::size_t i0, std::size_t i1) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = i0;
    for (; i + 4 <= i1; i += 4)
      acc = _mm256_add_pd(acc, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i), vs)));
    double s = hsum(acc);
    for (; i < i1; ++i) s += std::exp(a[i] - shift);
    return s;
  });
}

double v_sum_exp2(const double* a, const double* b, std::size_t n,
                  double shift) {
  const __m256d vs = _mm256_set1_pd(shift);
  return pairwise(0, n, [a, b, vs, shift](std::size_t i0, std::size_t i1) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = i0;
    for (; i + 4 <= i1; i += 4) {
      const __m256d v =
          _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
      acc = _mm256_add_pd(acc, exp_pd(_mm256_sub_pd(v, vs)));
    }
    double s = hsum(acc);
    for (; i < i1; ++i) s += std::exp(a[i] + b[i] - shift);
    return s;
  });
}

double v_sum_sq_dev(const double* a, std::size_t n, double center) {
  const __m256d vc = _mm256_set1_pd(center);
  return pairwise(0, n, [a, vc, center](std::size_t i0, std::size_t i1) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = i0;
    for (; i + 4 <= i1; i += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), vc);
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < i1; ++i) {
      const double d = a[i] - center;
      s += d * d;
    }
    return s;
  });
}

void v_clamp_upper(const double* a, std::size_t n, double hi, double* out) {
  const __m256d vh = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_min_pd(_mm256_loadu_pd(a + i), vh));
  for (; i < n; ++i) out[i] = a[i] < hi ? a[i] : hi;
}

}  // namespace

const Kernels& avx2() {
  static const Kernels k = {
      "avx2",    v_reduce_max, v_reduce_max2, v_sum,
      v_sum_exp, v_sum_exp2,   v_sum_sq_dev,  v_clamp_upper,
  };
  return k;
}

}  // namespace subloo::kernels

#else

namespace subloo::kernels {
const Kernels& avx2() { return scalar(); }
}  // namespace subloo::kernels

#endif
