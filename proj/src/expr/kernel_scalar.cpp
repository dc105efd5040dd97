#include "kernels.hpp"

namespace feff::expr::kernels {

void run_scalar(const Instr* code, std::size_t n, const double* vars, double* reg) {
  for (std::size_t i = 0; i < n; ++i) {
    const Instr& in = code[i];
    double* r = reg + i * kLanes;
    const double* x = reg + std::size_t(in.a) * kLanes;
    const double* y = reg + std::size_t(in.b) * kLanes;
    switch (in.op) {
      case Op::Const:
        for (int l = 0; l < kLanes; ++l) r[l] = in.c;
        break;
      case Op::Var:
        for (int l = 0; l < kLanes; ++l) r[l] = vars[in.k * kLanes + l];
        break;
      case Op::Neg:
        for (int l = 0; l < kLanes; ++l) r[l] = -x[l];
        break;
      case Op::Sqrt:
        for (int l = 0; l < kLanes; ++l) r[l] = std::sqrt(x[l]);
        break;
      case Op::Add:
        for (int l = 0; l < kLanes; ++l) r[l] = x[l] + y[l];
        break;
      case Op::Sub:
        for (int l = 0; l < kLanes; ++l) r[l] = x[l] - y[l];
        break;
      case Op::Mul:
        for (int l = 0; l < kLanes; ++l) r[l] = x[l] * y[l];
        break;
      case Op::Div:
        for (int l = 0; l < kLanes; ++l) r[l] = x[l] / y[l];
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
