#include "feff/identity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace feff {

std::vector<Measured> measure(const std::vector<Identity>& ids, std::span<const double> points, int workers) {
  struct Handles {
    int lhs = -1;
    int rhs = -1;
    std::vector<int> scale;
  };
  FieldEvaluator ev;
  std::vector<Handles> hs;
  for (const Identity& id : ids) {
    Handles h;
    h.lhs = ev.add(id.lhs);
    if (id.rhs.size() > 0) {
      if (id.rhs.size() != id.lhs.size()) throw std::logic_error("identity '" + id.name + "': shape mismatch");
      h.rhs = ev.add(id.rhs);
    }
    for (const SymField& s : id.scale_terms) h.scale.push_back(ev.add(s));
    hs.push_back(std::move(h));
  }
  std::vector<Measured> out(ids.size());
  if (ids.empty()) return out;
  ev.run(points, workers);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Measured& m = out[i];
    const Handles& h = hs[i];
    for (std::size_t p = 0; p < ev.points(); ++p) {
      const NumField l = ev.get(h.lhs, p);
      double res = 0.0;
      double scale = 0.0;
      if (h.rhs >= 0) {
        const NumField r = ev.get(h.rhs, p);
        for (std::size_t k = 0; k < l.size(); ++k) res = std::max(res, std::abs(l[k] - r[k]));
        if (h.scale.empty()) scale = std::max(max_abs(l), max_abs(r));
      } else {
        res = max_abs(l);
        if (h.scale.empty()) scale = res;
      }
      for (int s : h.scale) scale = std::max(scale, max_abs(ev.get(s, p)));
      m.per_point.push_back(res);
      m.residual = std::max(m.residual, res);
      m.scale = std::max(m.scale, scale);
    }
  }
  return out;
}

double max_abs_over(const SymField& f, std::span<const double> points, int workers) {
  FieldEvaluator ev;
  const int h = ev.add(f);
  ev.run(points, workers);
  double m = 0.0;
  for (std::size_t p = 0; p < ev.points(); ++p) m = std::max(m, max_abs(ev.get(h, p)));
  return m;
}

}  // namespace feff
