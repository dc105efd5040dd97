#include "feff/symfield.hpp"

#include <stdexcept>

namespace feff {

int FieldEvaluator::add(const SymField& field) {
  entries_.push_back({field.shape(), roots_.size()});
  roots_.insert(roots_.end(), field.components().begin(), field.components().end());
  return static_cast<int>(entries_.size() - 1);
}

int FieldEvaluator::add(expr::Expr scalar) {
  entries_.push_back({Shape(scalar.pool()->dimension(), {}), roots_.size()});
  roots_.push_back(scalar);
  return static_cast<int>(entries_.size() - 1);
}

void FieldEvaluator::run(std::span<const double> points, int workers) {
  if (roots_.empty()) throw std::logic_error("FieldEvaluator::run with no fields");
  tape_ = expr::Tape::compile(roots_);
  const auto dim = static_cast<std::size_t>(tape_.dimension());
  npoints_ = points.size() / dim;
  values_.assign(npoints_ * roots_.size(), 0.0);
  tape_.evaluate(points, values_, workers);
}

NumField FieldEvaluator::get(int handle, std::size_t point) const {
  const Entry& e = entries_.at(static_cast<std::size_t>(handle));
  NumField f(e.shape, 0.0);
  const double* row = values_.data() + point * roots_.size() + e.offset;
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = row[i];
  return f;
}

double FieldEvaluator::scalar(int handle, std::size_t point) const {
  const Entry& e = entries_.at(static_cast<std::size_t>(handle));
  return values_[point * roots_.size() + e.offset];
}

}  // namespace feff
