#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "feff/expr.hpp"
#include "feff/symfield.hpp"

namespace feff {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

enum class ScaleNote { Preferred, Unknown };

/// A closed-form pseudo-Riemannian metric on a coordinate box together with
/// a candidate vector field and sampling parameters.
struct GeometrySpec {
  std::string name;
  int n = 0;
  std::vector<int> signature;
  std::vector<std::string> coords;
  std::shared_ptr<expr::Pool> pool;
  SymField metric;  // g_ab
  SymField kappa;   // kappa^a
  std::vector<Interval> domain;
  int samples = 20;
  std::uint64_t seed = 1;
  ScaleNote scale = ScaleNote::Unknown;
  std::optional<expr::Expr> omega;

  /// Builds a spec from expression strings. Metric is the row-major lower
  /// triangle (g_00, g_10, g_11, g_20, ...). Throws InputError/ParseError.
  static GeometrySpec from_strings(std::string name, std::vector<int> signature, std::vector<std::string> coords,
                                   const std::vector<std::string>& metric_lower_triangle,
                                   const std::vector<std::string>& kappa, std::vector<Interval> domain);

  /// Same geometry with g replaced by exp(2 omega) g. The result is never
  /// marked as a preferred scale.
  GeometrySpec rescaled(expr::Expr omega) const;
};

/// Seeded uniform draws strictly inside the domain box shrunk by 5% of the
/// width from each face. Returns samples x n doubles, row major.
std::vector<double> sample_points(const GeometrySpec& spec);
std::vector<double> sample_points(const std::vector<Interval>& domain, int count, std::uint64_t seed);

/// Centre of the domain box.
std::vector<double> domain_centre(const GeometrySpec& spec);

}  // namespace feff
