#pragma once

// Identities as pairs of symbolic fields, measured at sample points.

#include <span>
#include <string>
#include <vector>

#include "feff/symfield.hpp"

namespace feff {

enum class TolClass { Alg, Id };

struct Tolerances {
  double alg = 1e-10;
  double id = 1e-8;
  double ode = 1e-6;

  double id_scaled(double scale) const { return id * (1.0 + scale); }
  double threshold(TolClass c, double scale) const { return c == TolClass::Alg ? alg : id_scaled(scale); }
};

/// lhs == rhs componentwise. An empty rhs (size 0) means zero. The magnitude
/// scale is the max absolute component over `scale_terms`, or over lhs and
/// rhs when no scale terms are given.
struct Identity {
  std::string name;
  std::string anchor;
  TolClass tol = TolClass::Id;
  SymField lhs;
  SymField rhs;
  std::vector<SymField> scale_terms;
  // Holds only under extra hypotheses; reported, never part of a pass/fail
  // aggregate.
  bool diagnostic = false;
};

struct Measured {
  double residual = 0.0;
  double scale = 0.0;
  std::vector<double> per_point;  // residual at each sample
};

/// Evaluates all identities in one shared tape.
std::vector<Measured> measure(const std::vector<Identity>& ids, std::span<const double> points, int workers = 1);

/// Max absolute component over points.
double max_abs_over(const SymField& f, std::span<const double> points, int workers = 1);

}  // namespace feff
