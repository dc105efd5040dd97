#include "feff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "feff/errors.hpp"
#include "kernels.hpp"

namespace feff::expr {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

std::optional<Isa> isa_from_name(std::string_view name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  if (name == "neon") return Isa::Neon;
  return std::nullopt;
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

namespace {

std::optional<Isa>& isa_override() {
  static std::optional<Isa> value = [] {
    std::optional<Isa> v;
    if (const char* env = std::getenv("FEFF_ISA")) {
      v = isa_from_name(env);
      if (v && !isa_available(*v)) v.reset();
    }
    return v;
  }();
  return value;
}

void run_block(Isa isa, const Instr* code, std::size_t n, const double* vars, double* reg) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: kernels::run_avx2(code, n, vars, reg); return;
#endif
#if defined(__aarch64__)
    case Isa::Neon: kernels::run_neon(code, n, vars, reg); return;
#endif
    default: kernels::run_scalar(code, n, vars, reg); return;
  }
}

}  // namespace

Isa active_isa() {
  if (auto& o = isa_override()) return *o;
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

void set_isa_override(std::optional<Isa> isa) {
  if (isa && !isa_available(*isa)) throw std::invalid_argument("ISA not available on this CPU");
  isa_override() = isa;
}

Tape Tape::compile(std::span<const Expr> roots) {
  Tape tape;
  if (roots.empty()) return tape;
  const Pool* pool = roots.front().pool();
  tape.pool_ = pool;
  tape.dim_ = pool->dimension();

  std::unordered_map<NodeId, std::int32_t> slot;
  std::vector<std::pair<NodeId, bool>> stack;
  auto emit = [&](NodeId id) {
    const Node& n = pool->node(id);
    Instr in;
    in.op = n.op;
    if (n.op == Op::Const) in.c = n.value;
    if (n.op == Op::Var || n.op == Op::Pow) in.k = n.k;
    if (is_unary(n.op) || n.op == Op::Pow || is_binary(n.op)) in.a = slot.at(n.a);
    if (is_binary(n.op)) in.b = slot.at(n.b);
    slot.emplace(id, static_cast<std::int32_t>(tape.code_.size()));
    tape.code_.push_back(in);
    tape.origin_.push_back(id);
  };
  for (const Expr& root : roots) {
    if (root.pool() != pool) throw std::invalid_argument("tape roots from different pools");
    stack.emplace_back(root.id(), false);
    while (!stack.empty()) {
      auto [id, expanded] = stack.back();
      stack.pop_back();
      if (slot.count(id)) continue;
      const Node& n = pool->node(id);
      const bool leaf = n.op == Op::Const || n.op == Op::Var;
      if (expanded || leaf) {
        emit(id);
        continue;
      }
      stack.emplace_back(id, true);
      if (is_binary(n.op) && !slot.count(n.b)) stack.emplace_back(n.b, false);
      if (!slot.count(n.a)) stack.emplace_back(n.a, false);
    }
    tape.outputs_.push_back(slot.at(root.id()));
  }
  return tape;
}

void Tape::check_block(const Workspace& ws, const double* vars, int lanes) const {
  for (std::size_t i = 0; i < code_.size(); ++i) {
    for (int l = 0; l < lanes; ++l) {
      const double v = ws.reg_[i * kLanes + l];
      if (std::isfinite(v)) continue;
      std::ostringstream msg;
      msg.precision(17);
      msg << "domain error: " << op_name(code_[i].op) << " node `" << describe_node(*pool_, origin_[i])
          << "` evaluates to " << v << " at point (";
      for (int k = 0; k < dim_; ++k) msg << (k ? ", " : "") << vars[k * kLanes + l];
      msg << ")";
      throw NumericalError(msg.str());
    }
  }
}

void Tape::evaluate_block(const double* vars, int lanes, double* out, Workspace& ws, Isa isa) const {
  if (ws.reg_.size() < code_.size() * kLanes) ws.reg_.resize(code_.size() * kLanes);
  run_block(isa, code_.data(), code_.size(), vars, ws.reg_.data());
  check_block(ws, vars, lanes);
  for (std::size_t j = 0; j < outputs_.size(); ++j)
    for (int l = 0; l < kLanes; ++l) out[j * kLanes + l] = ws.reg_[std::size_t(outputs_[j]) * kLanes + l];
}

void Tape::evaluate(std::span<const double> points, std::span<double> out, int workers) const {
  evaluate(points, out, active_isa(), workers);
}

void Tape::evaluate(std::span<const double> points, std::span<double> out, Isa isa, int workers) const {
  const std::size_t dim = static_cast<std::size_t>(dim_);
  if (dim == 0 && !code_.empty()) throw std::invalid_argument("tape without coordinates");
  const std::size_t npoints = dim ? points.size() / dim : 0;
  if (npoints * dim != points.size()) throw std::invalid_argument("point buffer not a multiple of dimension");
  if (out.size() != npoints * outputs_.size()) throw std::invalid_argument("output buffer size mismatch");
  if (code_.empty() || npoints == 0) return;

  const std::size_t nblocks = (npoints + kLanes - 1) / kLanes;
  auto do_block = [&](std::size_t blk, Workspace& ws) {
    const std::size_t first = blk * kLanes;
    const int lanes = static_cast<int>(std::min<std::size_t>(kLanes, npoints - first));
    std::vector<double> vars(dim * kLanes);
    std::vector<double> res(outputs_.size() * kLanes);
    // Tail lanes repeat the last valid point so they cannot raise spurious errors.
    for (int l = 0; l < kLanes; ++l) {
      const std::size_t p = first + std::min(l, lanes - 1);
      for (std::size_t k = 0; k < dim; ++k) vars[k * kLanes + l] = points[p * dim + k];
    }
    evaluate_block(vars.data(), lanes, res.data(), ws, isa);
    for (int l = 0; l < lanes; ++l)
      for (std::size_t j = 0; j < outputs_.size(); ++j) out[(first + l) * outputs_.size() + j] = res[j * kLanes + l];
  };

  const std::size_t nthreads = std::min<std::size_t>(std::max(1, workers), nblocks);
  if (nthreads <= 1) {
    Workspace ws(*this);
    for (std::size_t b = 0; b < nblocks; ++b) do_block(b, ws);
    return;
  }
  // Each block writes a disjoint slice of `out`; the first error (lowest
  // block index) wins so reports do not depend on scheduling.
  std::vector<std::exception_ptr> errors(nblocks);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      Workspace ws(*this);
      for (std::size_t b = t; b < nblocks; b += nthreads) {
        try {
          do_block(b, ws);
        } catch (...) {
          errors[b] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double eval(Expr e, std::span<const double> point) {
  if (static_cast<int>(point.size()) != e.pool()->dimension())
    throw std::invalid_argument("point dimension does not match chart");
  for (double v : point)
    if (!std::isfinite(v)) throw std::invalid_argument("point has non-finite coordinate");
  const Tape tape = Tape::compile(std::span<const Expr>(&e, 1));
  double out = 0.0;
  tape.evaluate(point, std::span<double>(&out, 1), Isa::Scalar, 1);
  return out;
}

}  // namespace feff::expr
