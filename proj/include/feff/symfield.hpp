#pragma once

#include <span>
#include <vector>

#include "feff/expr.hpp"
#include "feff/field.hpp"
#include "feff/tape.hpp"

namespace feff {

using SymField = Field<expr::Expr>;

inline SymField zeros(const Shape& shape, expr::Pool& pool) { return SymField(shape, pool.zero()); }

/// Compiles a set of symbolic fields into one tape and evaluates them at a
/// list of points. Fields registered together share common subexpressions.
class FieldEvaluator {
 public:
  /// Registers a field; returns its handle.
  int add(const SymField& field);
  int add(expr::Expr scalar);

  /// points: npoints x dimension (row major).
  void run(std::span<const double> points, int workers = 1);

  std::size_t points() const { return npoints_; }
  NumField get(int handle, std::size_t point) const;
  double scalar(int handle, std::size_t point) const;
  std::size_t tape_size() const { return tape_.size(); }

 private:
  struct Entry {
    Shape shape;
    std::size_t offset;
  };
  std::vector<Entry> entries_;
  std::vector<expr::Expr> roots_;
  expr::Tape tape_;
  std::vector<double> values_;
  std::size_t npoints_ = 0;
};

}  // namespace feff
