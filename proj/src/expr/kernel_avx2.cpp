#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "kernels.hpp"

static_assert(feff::expr::kLanes == 4, "AVX2 kernel packs four doubles per register");

namespace feff::expr::kernels {

__attribute__((target("avx2"))) void run_avx2(const Instr* code, std::size_t n, const double* vars,
                                              double* reg) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Instr& in = code[i];
    double* r = reg + i * kLanes;
    const double* x = reg + std::size_t(in.a) * kLanes;
    const double* y = reg + std::size_t(in.b) * kLanes;
    switch (in.op) {
      case Op::Const:
        _mm256_storeu_pd(r, _mm256_set1_pd(in.c));
        break;
      case Op::Var:
        _mm256_storeu_pd(r, _mm256_loadu_pd(vars + in.k * kLanes));
        break;
      case Op::Neg:
        _mm256_storeu_pd(r, _mm256_xor_pd(_mm256_loadu_pd(x), sign));
        break;
      case Op::Sqrt:
        _mm256_storeu_pd(r, _mm256_sqrt_pd(_mm256_loadu_pd(x)));
        break;
      case Op::Add:
        _mm256_storeu_pd(r, _mm256_add_pd(_mm256_loadu_pd(x), _mm256_loadu_pd(y)));
        break;
      case Op::Sub:
        _mm256_storeu_pd(r, _mm256_sub_pd(_mm256_loadu_pd(x), _mm256_loadu_pd(y)));
        break;
      case Op::Mul:
        _mm256_storeu_pd(r, _mm256_mul_pd(_mm256_loadu_pd(x), _mm256_loadu_pd(y)));
        break;
      case Op::Div:
        _mm256_storeu_pd(r, _mm256_div_pd(_mm256_loadu_pd(x), _mm256_loadu_pd(y)));
        break;
      case Op::Pow: {
        __m256d result = _mm256_set1_pd(1.0);
        __m256d base = _mm256_loadu_pd(x);
        int k = in.k;
        while (k > 0) {
          if (k & 1) result = _mm256_mul_pd(result, base);
          k >>= 1;
          if (k) base = _mm256_mul_pd(base, base);
        }
        _mm256_storeu_pd(r, result);
        break;
      }
      default:
        // No vector libm: lane-wise calls keep results identical to the scalar kernel.
        for (int l = 0; l < kLanes; ++l) r[l] = apply_unary(in.op, x[l]);
        break;
    }
  }
}

}  // namespace feff::expr::kernels

#endif
