#include "feff/geocalc.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "feff/errors.hpp"

namespace feff {

using expr::Expr;

namespace {

expr::Pool& pool_of(const SymField& f) {
  for (const Expr& e : f.components())
    if (e.valid()) return *e.pool();
  throw std::logic_error("field without pool");
}

class Determinant {
 public:
  explicit Determinant(const SymField& m) : m_(m), n_(m.shape().extent(0)), pool_(pool_of(m)) {}

  // Determinant of the submatrix on the rows in `rows` and columns in `cols`
  // (equal popcount), expanded along the lowest row.
  Expr sub(std::uint32_t rows, std::uint32_t cols) {
    if (rows == 0) return pool_.one();
    const std::uint64_t key = (std::uint64_t(rows) << 32) | cols;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const int r = std::countr_zero(rows);
    Expr acc = pool_.zero();
    int pos = 0;
    for (int c = 0; c < n_; ++c) {
      if (!(cols & (1u << c))) continue;
      Expr entry = m_(r, c);
      if (!entry.is_zero()) {
        Expr term = entry * sub(rows & ~(1u << r), cols & ~(1u << c));
        acc = (pos % 2 == 0) ? acc + term : acc - term;
      }
      ++pos;
    }
    memo_.emplace(key, acc);
    return acc;
  }

  std::uint32_t full() const { return (n_ == 32) ? ~0u : ((1u << n_) - 1u); }
  int size() const { return n_; }

 private:
  const SymField& m_;
  int n_;
  expr::Pool& pool_;
  std::unordered_map<std::uint64_t, Expr> memo_;
};

void require_square(const SymField& m) {
  if (m.rank() != 2 || m.shape().extent(0) != m.shape().extent(1)) throw std::invalid_argument("matrix field required");
}

}  // namespace

Expr determinant(const SymField& m) {
  require_square(m);
  Determinant d(m);
  return d.sub(d.full(), d.full());
}

SymField inverse(const SymField& m, Shape inverse_shape) {
  require_square(m);
  Determinant d(m);
  const int n = d.size();
  expr::Pool& pool = pool_of(m);
  Expr det = d.sub(d.full(), d.full());
  SymField inv = zeros(inverse_shape, pool);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Expr minor = d.sub(d.full() & ~(1u << i), d.full() & ~(1u << j));
      Expr cof = ((i + j) % 2 == 0) ? minor : -minor;
      inv(j, i) = cof / det;
    }
  return inv;
}

SymField covariant_derivative(const SymField& t, const Connection& conn) {
  if (!conn.christoffel) throw std::invalid_argument("connection without Christoffel symbols");
  const SymField& gam = *conn.christoffel;
  const int n = gam.shape().dim();
  const Shape& ts = t.shape();
  for (int k = 0; k < ts.rank(); ++k)
    if (ts.slot(k).kind == IndexKind::Tractor && !conn.tractor)
      throw std::invalid_argument("tractor slot without tractor connection");
  expr::Pool& pool = pool_of(gam);
  SymField out = zeros(ts.prepend(kDown), pool);
  for (std::size_t off = 0; off < t.size(); ++off) {
    const Index idx = ts.unflat(off);
    for (int a = 0; a < n; ++a) {
      Expr acc = expr::diff(t[off], a);
      for (int k = 0; k < ts.rank(); ++k) {
        const Slot s = ts.slot(k);
        Index j = idx;
        for (int m = 0; m < ts.extent(k); ++m) {
          j[k] = m;
          const Expr& tm = t.at(j);
          if (tm.is_zero()) continue;
          if (s.kind == IndexKind::Tensor) {
            if (s.var == Variance::Upper)
              acc += gam(idx[k], a, m) * tm;
            else
              acc -= gam(m, a, idx[k]) * tm;
          } else {
            const SymField& gt = *conn.tractor;
            if (s.var == Variance::Upper)
              acc += gt(a, idx[k], m) * tm;
            else
              acc -= gt(a, m, idx[k]) * tm;
          }
        }
      }
      Index o{};
      o[0] = a;
      for (int k = 0; k < ts.rank(); ++k) o[k + 1] = idx[k];
      out.at(o) = acc;
    }
  }
  return out;
}

SymField christoffel(const SymField& g, const SymField& ginv) {
  require_square(g);
  const int n = g.shape().dim();
  expr::Pool& P = pool_of(g);
  const Expr half = P.rational(1, 2);
  SymField gamma = zeros(Shape(n, {kUp, kDown, kDown}), P);
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Expr acc = P.zero();
        for (int d = 0; d < n; ++d) {
          if (ginv(c, d).is_zero()) continue;
          acc += ginv(c, d) * (expr::diff(g(d, b), a) + expr::diff(g(d, a), b) - expr::diff(g(a, b), d));
        }
        gamma(c, a, b) = half * acc;
      }
  return gamma;
}

SymField christoffel(const SymField& g) { return christoffel(g, inverse(g, Shape(g.shape().dim(), {kUp, kUp}))); }

Curvature::Curvature(const GeometrySpec& spec) : spec_(spec) {
  const int n = spec_.n;
  if (n < 3) throw InputError("dimension must be at least 3");
  expr::Pool& P = *spec_.pool;
  const SymField& g = spec_.metric;
  det_ = determinant(g);
  ginv_ = inverse(g, Shape(n, {kUp, kUp}));

  gamma_ = feff::christoffel(g, ginv_);

  riem_ = zeros(Shape(n, {kDown, kDown, kUp, kDown}), P);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          Expr acc = expr::diff(gamma_(c, b, d), a) - expr::diff(gamma_(c, a, d), b);
          for (int e = 0; e < n; ++e) acc += gamma_(c, a, e) * gamma_(e, b, d) - gamma_(c, b, e) * gamma_(e, a, d);
          riem_(a, b, c, d) = acc;
        }

  ric_ = zeros(Shape(n, {kDown, kDown}), P);
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      Expr acc = P.zero();
      for (int a = 0; a < n; ++a) acc += riem_(a, b, a, d);
      ric_(b, d) = acc;
    }
  scal_ = P.zero();
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) scal_ += ginv_(b, d) * ric_(b, d);

  schouten_ = zeros(Shape(n, {kDown, kDown}), P);
  const Expr c1 = P.rational(1, 2 * (n - 1));
  const Expr c2 = P.rational(1, n - 2);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) schouten_(a, b) = c2 * (ric_(a, b) - c1 * scal_ * g(a, b));
  j_ = P.zero();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) j_ += ginv_(a, b) * schouten_(a, b);

  riem_low_ = zeros(Shape(n, {kDown, kDown, kDown, kDown}), P);
  weyl_ = zeros(riem_low_.shape(), P);
  const SymField& Ps = schouten_;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          Expr acc = P.zero();
          for (int e = 0; e < n; ++e) acc += g(c, e) * riem_(a, b, e, d);
          riem_low_(a, b, c, d) = acc;
          weyl_(a, b, c, d) =
              acc - (g(a, c) * Ps(b, d) - g(b, c) * Ps(a, d) + g(b, d) * Ps(a, c) - g(a, d) * Ps(b, c));
        }

  const SymField dP = nabla(schouten_);  // dP(e, a, b) = nabla_e P_ab
  cotton_ = zeros(Shape(n, {kDown, kDown, kDown}), P);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) cotton_(a, b, c) = dP(b, c, a) - dP(c, b, a);
}

namespace {

SymField contract_slot(const SymField& t, int slot, const SymField& m, Variance new_var) {
  const Shape& ts = t.shape();
  if (ts.slot(slot).kind != IndexKind::Tensor) throw std::invalid_argument("not a tensor slot");
  std::vector<Slot> slots = ts.slots();
  slots[static_cast<std::size_t>(slot)].var = new_var;
  Shape os(ts.dim(), slots);
  SymField out = zeros(os, pool_of(m));
  for (std::size_t off = 0; off < out.size(); ++off) {
    const Index idx = os.unflat(off);
    Expr acc = out[off];
    Index j = idx;
    for (int k = 0; k < ts.dim(); ++k) {
      j[slot] = k;
      acc += m(idx[slot], k) * t.at(j);
    }
    out[off] = acc;
  }
  return out;
}

}  // namespace

SymField Curvature::raise(const SymField& t, int slot) const {
  if (t.shape().slot(slot).var != Variance::Lower) throw std::invalid_argument("raise needs a lower slot");
  return contract_slot(t, slot, ginv_, Variance::Upper);
}

SymField Curvature::lower(const SymField& t, int slot) const {
  if (t.shape().slot(slot).var != Variance::Upper) throw std::invalid_argument("lower needs an upper slot");
  return contract_slot(t, slot, spec_.metric, Variance::Lower);
}

CurvatureBundle curvature_bundle(const Curvature& curv, std::span<const double> point) {
  FieldEvaluator ev;
  const int hg = ev.add(curv.metric());
  const int hG = ev.add(curv.christoffel());
  const int hR = ev.add(curv.riemann());
  const int hRic = ev.add(curv.ricci());
  const int hS = ev.add(curv.scalar());
  const int hP = ev.add(curv.schouten());
  const int hJ = ev.add(curv.schouten_trace());
  const int hC = ev.add(curv.weyl());
  const int hA = ev.add(curv.cotton());
  ev.run(point);
  CurvatureBundle b;
  b.point.assign(point.begin(), point.end());
  b.metric = ev.get(hg, 0);
  b.Gamma = ev.get(hG, 0);
  b.Riem = ev.get(hR, 0);
  b.Ric = ev.get(hRic, 0);
  b.Scal = ev.scalar(hS, 0);
  b.P = ev.get(hP, 0);
  b.J = ev.scalar(hJ, 0);
  b.C = ev.get(hC, 0);
  b.A = ev.get(hA, 0);
  return b;
}

KappaJets kappa_jets(const Curvature& curv) {
  const int n = curv.dimension();
  expr::Pool& P = curv.pool();
  const SymField& g = curv.metric();
  const SymField& gi = curv.inverse_metric();
  KappaJets k;
  k.upper = curv.spec().kappa;
  k.lower = curv.lower(k.upper, 0);
  k.nabla = curv.nabla(k.lower);
  k.nabla2 = curv.nabla(k.nabla);
  k.nabla_up = curv.raise(curv.raise(k.nabla, 0), 1);
  k.div = P.zero();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) k.div += gi(a, b) * k.nabla(a, b);
  k.grad_div = zeros(Shape(n, {kDown}), P);
  for (int a = 0; a < n; ++a) k.grad_div(a) = expr::diff(k.div, a);
  k.norm = P.zero();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) k.norm += g(a, b) * k.upper(a) * k.upper(b);
  return k;
}

void validate_metric(const Curvature& curv, std::span<const double> points) {
  const int n = curv.dimension();
  FieldEvaluator ev;
  const int hg = ev.add(curv.metric());
  const int hd = ev.add(curv.det());
  ev.run(points);
  int want_pos = 0;
  for (int s : curv.spec().signature) want_pos += (s > 0);
  for (std::size_t p = 0; p < ev.points(); ++p) {
    const NumField g = ev.get(hg, p);
    Eigen::MatrixXd m(n, n);
    double rownorms = 1.0;
    for (int i = 0; i < n; ++i) {
      double r = 0.0;
      for (int j = 0; j < n; ++j) {
        m(i, j) = g(i, j);
        r += g(i, j) * g(i, j);
      }
      rownorms *= std::sqrt(r);
    }
    auto where = [&] {
      std::ostringstream s;
      s.precision(17);
      s << "(";
      for (int i = 0; i < n; ++i) s << (i ? ", " : "") << points[p * n + i];
      s << ")";
      return s.str();
    };
    const double det = ev.scalar(hd, p);
    if (!(std::abs(det) > 1e-12 * rownorms)) throw NumericalError("degenerate metric: det g = " + std::to_string(det) + " at point " + where());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    int pos = 0;
    for (int i = 0; i < n; ++i) pos += es.eigenvalues()(i) > 0;
    if (pos != want_pos)
      throw InputError("metric signature (" + std::to_string(pos) + "," + std::to_string(n - pos) +
                       ") does not match declared (" + std::to_string(want_pos) + "," + std::to_string(n - want_pos) +
                       ") at point " + where());
  }
}

SymField conformal_killing_tensor(const Curvature& curv, const KappaJets& k) {
  const int n = curv.dimension();
  expr::Pool& P = curv.pool();
  const Expr half = P.rational(1, 2);
  const Expr inv_n = P.rational(1, n);
  SymField out = zeros(Shape(n, {kDown, kDown}), P);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      out(a, b) = half * (k.nabla(a, b) + k.nabla(b, a)) - inv_n * k.div * curv.metric()(a, b);
  return out;
}

std::vector<Identity> curvature_identities(const Curvature& curv) {
  const int n = curv.dimension();
  expr::Pool& P = curv.pool();
  const SymField& g = curv.metric();
  const SymField& gi = curv.inverse_metric();
  const SymField& R = curv.riemann();
  const SymField& Rl = curv.riemann_lower();
  const SymField& C = curv.weyl();
  const SymField& A = curv.cotton();
  std::vector<Identity> ids;

  ids.push_back({"metricity", "nabla_a g_bc = 0", TolClass::Alg, curv.nabla(g), {}, {}});

  {
    SymField swapped = zeros(R.shape(), P);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) swapped(a, b, c, d) = -R(b, a, c, d);
    ids.push_back({"riemann_antisymmetry", "R_ab^c_d = -R_ba^c_d", TolClass::Alg, R, swapped, {}});
  }
  {
    SymField cyc = zeros(Rl.shape(), P);
    SymField paired = zeros(Rl.shape(), P);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            cyc(a, b, c, d) = Rl(a, b, c, d) + Rl(b, c, a, d) + Rl(c, a, b, d);
            paired(a, b, c, d) = Rl(c, d, a, b);
          }
    ids.push_back({"first_bianchi", "R_[abc]d = 0", TolClass::Alg, cyc, {}, {Rl}});
    ids.push_back({"pair_symmetry", "R_abcd = R_cdab", TolClass::Alg, Rl, paired, {}});
  }
  {
    SymField tr_ac = zeros(Shape(n, {kDown, kDown}), P);
    SymField tr_bd = zeros(Shape(n, {kDown, kDown}), P);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        Expr s1 = P.zero(), s2 = P.zero();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            if (gi(i, j).is_zero()) continue;
            s1 += gi(i, j) * C(i, x, j, y);
            s2 += gi(i, j) * C(x, i, y, j);
          }
        tr_ac(x, y) = s1;
        tr_bd(x, y) = s2;
      }
    ids.push_back({"weyl_trace_free_ac", "g^ac C_abcd = 0", TolClass::Alg, tr_ac, {}, {C}});
    ids.push_back({"weyl_trace_free_bd", "g^bd C_abcd = 0", TolClass::Alg, tr_bd, {}, {C}});
  }
  {
    SymField alt = zeros(A.shape(), P);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) alt(a, b, c) = A(a, b, c) + A(b, c, a) + A(c, a, b);
    ids.push_back({"cotton_alternation", "A_[abc] = 0", TolClass::Alg, alt, {}, {A}});
  }
  {
    Expr trace = P.zero();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) trace += gi(a, b) * curv.schouten()(a, b);
    SymField lhs = zeros(Shape(n, {}), P), rhs = zeros(Shape(n, {}), P);
    lhs[0] = curv.schouten_trace();
    rhs[0] = P.rational(1, 2 * (n - 1)) * curv.scalar();
    ids.push_back({"schouten_trace", "J = Scal / (2(n-1))", TolClass::Alg, lhs, rhs, {}});
  }
  if (n >= 4) {
    const SymField dC = curv.nabla(C);  // dC(e, a, b, c, d)
    SymField div = zeros(Shape(n, {kDown, kDown, kDown}), P);
    SymField rhs = zeros(div.shape(), P);
    const Expr n3 = P.constant(n - 3);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d) {
          Expr acc = P.zero();
          for (int c = 0; c < n; ++c)
            for (int e = 0; e < n; ++e) {
              if (gi(c, e).is_zero()) continue;
              acc += gi(c, e) * dC(e, a, b, c, d);
            }
          div(a, b, d) = acc;
          rhs(a, b, d) = n3 * A(d, a, b);
        }
    ids.push_back({"weyl_divergence", "nabla^c C_abcd = (n-3) A_dab", TolClass::Id, div, rhs, {}});
  }
  return ids;
}

std::vector<Identity> kappa_identities(const Curvature& curv, const KappaJets& k) {
  const int n = curv.dimension();
  expr::Pool& P = curv.pool();
  const SymField& C = curv.weyl();
  const SymField& A = curv.cotton();
  std::vector<Identity> ids;

  SymField norm = zeros(Shape(n, {}), P);
  norm[0] = k.norm;
  ids.push_back({"isotropy", "g_ab kappa^a kappa^b = 0", TolClass::Id, norm, {}, {k.lower}});
  ids.push_back({"conformal_killing", "nabla_(a kappa_b) - (1/n) nabla_c kappa^c g_ab = 0", TolClass::Id,
                 conformal_killing_tensor(curv, k), {}, {k.nabla}});

  SymField kc = zeros(Shape(n, {kDown, kDown, kDown}), P);
  SymField cg = zeros(Shape(n, {kDown, kDown}), P);
  SymField ka = zeros(Shape(n, {kDown, kDown}), P);
  SymField kd = zeros(Shape(n, {kDown, kDown}), P);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      for (int d = 0; d < n; ++d) {
        Expr acc = P.zero();
        for (int a = 0; a < n; ++a) acc += k.upper(a) * C(a, b, c, d);
        kc(b, c, d) = acc;
      }
      Expr s_ka = P.zero(), s_kd = P.zero(), s_cg = P.zero();
      for (int a = 0; a < n; ++a) {
        s_ka += k.upper(a) * A(b, a, c);  // ka(c, b) = kappa^a A_cab
        s_kd += k.upper(a) * A(a, b, c);
      }
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) s_cg += C(b, c, x, y) * k.nabla_up(x, y);
      ka(b, c) = s_ka;
      kd(b, c) = s_kd;
      cg(b, c) = s_cg;
    }
  ids.push_back({"weyl_insertion", "kappa^a C_abcd = 0", TolClass::Id, kc, {}, {C}});
  ids.push_back({"cotton_insertion", "kappa^a A_cab = 0", TolClass::Id, ka, {}, {A}});
  SymField chain = zeros(cg.shape(), P);
  for (std::size_t i = 0; i < kd.size(); ++i) chain[i] = P.constant(-(n - 3)) * kd[i];
  Identity bianchi{"bianchi_chain", "C_abcd nabla^c kappa^d = -(n-3) kappa^d A_dab", TolClass::Id, cg, chain, {}};
  bianchi.diagnostic = true;
  ids.push_back(std::move(bianchi));
  return ids;
}

double conformal_killing_residual(const Curvature& curv, std::span<const double> points) {
  return max_abs_over(conformal_killing_tensor(curv, kappa_jets(curv)), points);
}

InsertionResiduals insertion_residuals(const Curvature& curv, std::span<const double> points) {
  const KappaJets k = kappa_jets(curv);
  const auto ids = kappa_identities(curv, k);
  const int n = curv.dimension();
  expr::Pool& P = curv.pool();
  const SymField& A = curv.cotton();
  SymField kd = zeros(Shape(n, {kDown, kDown}), P);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      Expr acc = P.zero();
      for (int a = 0; a < n; ++a) acc += k.upper(a) * A(a, b, c);
      kd(b, c) = acc;
    }
  std::vector<Identity> use;
  for (const auto& id : ids)
    if (id.name == "weyl_insertion" || id.name == "cotton_insertion" || id.name == "bianchi_chain") use.push_back(id);
  use.push_back({"cotton_first", "", TolClass::Id, kd, {}, {}});
  use.push_back({"weyl_gradient", "", TolClass::Id, use[2].lhs, {}, {}});
  const auto m = measure(use, points);
  InsertionResiduals r;
  r.weyl = m[0].residual;
  r.cotton = m[1].residual;
  r.bianchi_chain = m[2].residual;
  r.cotton_first = m[3].residual;
  r.weyl_gradient = m[4].residual;
  return r;
}

}  // namespace feff
