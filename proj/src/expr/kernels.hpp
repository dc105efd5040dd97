#pragma once

// Block kernels: run a tape over kLanes points held in reg[i * kLanes + lane].

#include <cmath>
#include <cstddef>

#include "feff/tape.hpp"

namespace feff::expr::kernels {

void run_scalar(const Instr* code, std::size_t n, const double* vars, double* reg);
#if defined(__x86_64__) || defined(_M_X64)
void run_avx2(const Instr* code, std::size_t n, const double* vars, double* reg);
#endif
#if defined(__aarch64__)
void run_neon(const Instr* code, std::size_t n, const double* vars, double* reg);
#endif

// Exponentiation by squaring; every kernel uses this exact multiplication
// sequence so results agree bit for bit.
inline double ipow(double x, int k) {
  double result = 1.0;
  double base = x;
  while (k > 0) {
    if (k & 1) result *= base;
    k >>= 1;
    if (k) base *= base;
  }
  return result;
}

inline double apply_unary(Op op, double x) {
  switch (op) {
    case Op::Sin: return std::sin(x);
    case Op::Cos: return std::cos(x);
    case Op::Tan: return std::tan(x);
    case Op::Exp: return std::exp(x);
    case Op::Log: return std::log(x);
    case Op::Sinh: return std::sinh(x);
    case Op::Cosh: return std::cosh(x);
    default: return 0.0;
  }
}

}  // namespace feff::expr::kernels
