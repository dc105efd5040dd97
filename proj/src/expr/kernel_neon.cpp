#if defined(__aarch64__)

#include <arm_neon.h>

#include "kernels.hpp"

namespace feff::expr::kernels {

// Two float64x2 halves per block of four lanes.
void run_neon(const Instr* code, std::size_t n, const double* vars, double* reg) {
  for (std::size_t i = 0; i < n; ++i) {
    const Instr& in = code[i];
    double* r = reg + i * kLanes;
    const double* x = reg + std::size_t(in.a) * kLanes;
    const double* y = reg + std::size_t(in.b) * kLanes;
    switch (in.op) {
      case Op::Const: {
        const float64x2_t c = vdupq_n_f64(in.c);
        vst1q_f64(r, c);
        vst1q_f64(r + 2, c);
        break;
      }
      case Op::Var:
        vst1q_f64(r, vld1q_f64(vars + in.k * kLanes));
        vst1q_f64(r + 2, vld1q_f64(vars + in.k * kLanes + 2));
        break;
      case Op::Neg:
        vst1q_f64(r, vnegq_f64(vld1q_f64(x)));
        vst1q_f64(r + 2, vnegq_f64(vld1q_f64(x + 2)));
        break;
      case Op::Sqrt:
        vst1q_f64(r, vsqrtq_f64(vld1q_f64(x)));
        vst1q_f64(r + 2, vsqrtq_f64(vld1q_f64(x + 2)));
        break;
      case Op::Add:
        vst1q_f64(r, vaddq_f64(vld1q_f64(x), vld1q_f64(y)));
        vst1q_f64(r + 2, vaddq_f64(vld1q_f64(x + 2), vld1q_f64(y + 2)));
        break;
      case Op::Sub:
        vst1q_f64(r, vsubq_f64(vld1q_f64(x), vld1q_f64(y)));
        vst1q_f64(r + 2, vsubq_f64(vld1q_f64(x + 2), vld1q_f64(y + 2)));
        break;
      case Op::Mul:
        vst1q_f64(r, vmulq_f64(vld1q_f64(x), vld1q_f64(y)));
        vst1q_f64(r + 2, vmulq_f64(vld1q_f64(x + 2), vld1q_f64(y + 2)));
        break;
      case Op::Div:
        vst1q_f64(r, vdivq_f64(vld1q_f64(x), vld1q_f64(y)));
        vst1q_f64(r + 2, vdivq_f64(vld1q_f64(x + 2), vld1q_f64(y + 2)));
        break;
      case Op::Pow:
        for (int l = 0; l < kLanes; ++l) r[l] = ipow(x[l], in.k);
        break;
      default:
        for (int l = 0; l < kLanes; ++l) r[l] = apply_unary(in.op, x[l]);
        break;
    }
  }
}

}  // namespace feff::expr::kernels

#endif
