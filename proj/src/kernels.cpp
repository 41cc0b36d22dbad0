#include "subloo/kernels.hpp"

namespace subloo::kernels {

bool avx2_supported() {
#if defined(SUBLOO_WITH_AVX2) && (defined(__x86_64__) || defined(_M_X64))
  static const bool ok =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

const Kernels& active() {
  static const Kernels& k = avx2_supported() ? avx2() : scalar();
  return k;
}

}  // namespace subloo::kernels
