#include "feff/geometry.hpp"

#include <random>
#include <set>

#include "feff/errors.hpp"
#include "feff/parse.hpp"

namespace feff {

namespace {

expr::Expr parse_component(const std::string& src, expr::Pool& pool, const std::string& what) {
  try {
    return expr::parse(src, pool);
  } catch (const ParseError& e) {
    throw ParseError(what + ": " + e.message(), e.line(), e.column());
  }
}

}  // namespace

GeometrySpec GeometrySpec::from_strings(std::string name, std::vector<int> signature, std::vector<std::string> coords,
                                        const std::vector<std::string>& metric_lower_triangle,
                                        const std::vector<std::string>& kappa, std::vector<Interval> domain) {
  const int n = static_cast<int>(coords.size());
  if (n < 3) throw InputError("dimension must be at least 3, got " + std::to_string(n));
  if (static_cast<int>(signature.size()) != n) throw InputError("signature length does not match dimension");
  for (int s : signature)
    if (s != 1 && s != -1) throw InputError("signature entries must be +1 or -1");
  std::set<std::string> seen;
  for (const auto& c : coords)
    if (!seen.insert(c).second) throw InputError("duplicate coordinate '" + c + "'");
  const std::size_t tri = static_cast<std::size_t>(n * (n + 1) / 2);
  if (metric_lower_triangle.size() != tri)
    throw InputError("metric needs " + std::to_string(tri) + " lower-triangle entries, got " +
                     std::to_string(metric_lower_triangle.size()));
  if (static_cast<int>(kappa.size()) != n) throw InputError("kappa length does not match dimension");
  if (static_cast<int>(domain.size()) != n) throw InputError("domain length does not match dimension");
  for (const auto& iv : domain)
    if (!(iv.lo < iv.hi)) throw InputError("domain interval must satisfy lo < hi");

  GeometrySpec spec;
  spec.name = std::move(name);
  spec.n = n;
  spec.signature = std::move(signature);
  spec.coords = coords;
  spec.pool = std::make_shared<expr::Pool>(std::move(coords));
  spec.domain = std::move(domain);
  expr::Pool& pool = *spec.pool;
  spec.metric = zeros(Shape(n, {kDown, kDown}), pool);
  std::size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j, ++k) {
      expr::Expr e = parse_component(metric_lower_triangle[k], pool,
                                     "metric g_" + spec.coords[i] + spec.coords[j]);
      spec.metric(i, j) = e;
      spec.metric(j, i) = e;
    }
  spec.kappa = zeros(Shape(n, {kUp}), pool);
  for (int i = 0; i < n; ++i) spec.kappa(i) = parse_component(kappa[i], pool, "kappa^" + spec.coords[i]);
  return spec;
}

GeometrySpec GeometrySpec::rescaled(expr::Expr omega) const {
  GeometrySpec out = *this;
  expr::Expr factor = expr::exp(2 * omega);
  for (std::size_t i = 0; i < out.metric.size(); ++i) out.metric[i] = factor * metric[i];
  out.scale = ScaleNote::Unknown;
  out.omega.reset();
  return out;
}

std::vector<double> sample_points(const std::vector<Interval>& domain, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(count) * domain.size());
  for (int s = 0; s < count; ++s)
    for (const Interval& iv : domain) {
      const double lo = iv.lo + 0.05 * iv.width();
      const double hi = iv.hi - 0.05 * iv.width();
      // 53 random bits mapped to [0, 1); avoids distribution-object variance across standard libraries.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      pts.push_back(lo + u * (hi - lo));
    }
  return pts;
}

std::vector<double> sample_points(const GeometrySpec& spec) { return sample_points(spec.domain, spec.samples, spec.seed); }

std::vector<double> domain_centre(const GeometrySpec& spec) {
  std::vector<double> c;
  for (const Interval& iv : spec.domain) c.push_back(0.5 * (iv.lo + iv.hi));
  return c;
}

}  // namespace feff
