#pragma once

// Straight-line evaluation of Expr DAGs.
//
// A Tape is the topologically sorted set of nodes reachable from a list of
// roots. Evaluation runs the tape over blocks of kLanes points at a time;
// the block kernel is picked at runtime (scalar reference, AVX2, NEON). All
// kernels produce bit-identical results: arithmetic is IEEE single-op and
// transcendental functions go through the same libm calls lane by lane.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "feff/expr.hpp"

namespace feff::expr {

inline constexpr int kLanes = 4;

struct Instr {
  Op op = Op::Const;
  std::int32_t a = 0;
  std::int32_t b = 0;
  std::int32_t k = 0;
  double c = 0.0;
};

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);
std::optional<Isa> isa_from_name(std::string_view name);
bool isa_available(Isa isa);
/// Best available ISA, unless overridden by FEFF_ISA or set_isa_override.
Isa active_isa();
void set_isa_override(std::optional<Isa> isa);

class Tape {
 public:
  Tape() = default;
  static Tape compile(std::span<const Expr> roots);

  std::size_t size() const { return code_.size(); }
  std::size_t outputs() const { return outputs_.size(); }
  int dimension() const { return dim_; }

  /// Register file for one block of lanes; reusable across calls.
  class Workspace {
   public:
    Workspace() = default;
    explicit Workspace(const Tape& tape) : reg_(tape.size() * kLanes) {}

   private:
    friend class Tape;
    std::vector<double> reg_;
  };

  /// points: npoints x dimension (row major); out: npoints x outputs.
  /// Throws NumericalError naming the first node that goes non-finite.
  void evaluate(std::span<const double> points, std::span<double> out, int workers = 1) const;
  void evaluate(std::span<const double> points, std::span<double> out, Isa isa, int workers) const;

  /// One block in structure-of-arrays layout: vars[k * kLanes + lane],
  /// out[j * kLanes + lane]. Lanes >= `lanes` are computed but not checked.
  void evaluate_block(const double* vars, int lanes, double* out, Workspace& ws, Isa isa) const;

 private:
  void check_block(const Workspace& ws, const double* vars, int lanes) const;

  std::vector<Instr> code_;
  std::vector<std::int32_t> outputs_;
  std::vector<NodeId> origin_;
  const Pool* pool_ = nullptr;
  int dim_ = 0;
};

/// Evaluates one expression at one point (convenience wrapper over Tape).
double eval(Expr e, std::span<const double> point);

}  // namespace feff::expr
