#include "feff/tractor.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace feff {

using expr::Expr;

namespace {

SymField contract_tractor_slot(const SymField& t, int slot, const SymField& m, Variance new_var, expr::Pool& pool) {
  const Shape& ts = t.shape();
  if (ts.slot(slot).kind != IndexKind::Tractor) throw std::invalid_argument("not a tractor slot");
  std::vector<Slot> slots = ts.slots();
  slots[static_cast<std::size_t>(slot)].var = new_var;
  const Shape os(ts.dim(), slots);
  SymField out = zeros(os, pool);
  const int N = ts.extent(slot);
  for (std::size_t off = 0; off < out.size(); ++off) {
    const Index idx = os.unflat(off);
    Expr acc = pool.zero();
    Index j = idx;
    for (int k = 0; k < N; ++k) {
      j[slot] = k;
      if (m(idx[slot], k).is_zero()) continue;
      acc += m(idx[slot], k) * t.at(j);
    }
    out[off] = acc;
  }
  return out;
}

}  // namespace

Tractor::Tractor(const Curvature& curv) : curv_(curv) {
  const int n = curv.dimension();
  const int N = n + 2;
  expr::Pool& P = curv.pool();
  const SymField& g = curv.metric();
  const SymField& gi = curv.inverse_metric();
  const SymField& Ps = curv.schouten();
  const SymField& G = curv.christoffel();

  h_ = zeros(Shape(n, {kTDown, kTDown}), P);
  hinv_ = zeros(Shape(n, {kTUp, kTUp}), P);
  h_(0, N - 1) = h_(N - 1, 0) = P.one();
  hinv_(0, N - 1) = hinv_(N - 1, 0) = P.one();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      h_(i + 1, j + 1) = g(i, j);
      hinv_(i + 1, j + 1) = gi(i, j);
    }

  x_low_ = zeros(Shape(n, {kTDown}), P);
  x_up_ = zeros(Shape(n, {kTUp}), P);
  y_low_ = zeros(Shape(n, {kTDown}), P);
  y_up_ = zeros(Shape(n, {kTUp}), P);
  x_low_(0) = P.one();
  x_up_(N - 1) = P.one();
  y_low_(N - 1) = P.one();
  y_up_(0) = P.one();
  z_low_ = zeros(Shape(n, {kTDown, kUp}), P);
  for (int a = 0; a < n; ++a) z_low_(a + 1, a) = P.one();
  z_up_ = contract_tractor_slot(z_low_, 0, hinv_, Variance::Upper, P);

  gt_ = zeros(Shape(n, {kDown, kTUp, kTDown}), P);
  for (int a = 0; a < n; ++a) {
    for (int j = 0; j < n; ++j) {
      gt_(a, 0, j + 1) = -g(a, j);
      gt_(a, N - 1, j + 1) = -Ps(a, j);
    }
    for (int i = 0; i < n; ++i) {
      Expr p_up = P.zero();
      for (int k = 0; k < n; ++k)
        if (!gi(i, k).is_zero()) p_up += gi(i, k) * Ps(a, k);
      gt_(a, i + 1, 0) = p_up;
      for (int j = 0; j < n; ++j) gt_(a, i + 1, j + 1) = G(i, a, j);
    }
    gt_(a, a + 1, N - 1) = P.one();
  }
}

SymField Tractor::raise(const SymField& t, int slot) const {
  if (t.shape().slot(slot).var != Variance::Lower) throw std::invalid_argument("raise needs a lower slot");
  return contract_tractor_slot(t, slot, hinv_, Variance::Upper, curv_.pool());
}

SymField Tractor::lower(const SymField& t, int slot) const {
  if (t.shape().slot(slot).var != Variance::Upper) throw std::invalid_argument("lower needs an upper slot");
  return contract_tractor_slot(t, slot, h_, Variance::Lower, curv_.pool());
}

SymField Tractor::curvature_formula() const {
  const int n = dimension();
  expr::Pool& P = curv_.pool();
  const SymField& C = curv_.weyl();
  const SymField& A = curv_.cotton();
  SymField om = zeros(Shape(n, {kDown, kDown, kTDown, kTDown}), P);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) om(a, b, i + 1, j + 1) = C(a, b, i, j);
        om(a, b, 0, i + 1) = -A(i, a, b);
        om(a, b, i + 1, 0) = A(i, a, b);
      }
    }
  return om;
}

SymField Tractor::curvature_commutator() const {
  const int n = dimension();
  const int N = rank();
  expr::Pool& P = curv_.pool();
  SymField om = zeros(Shape(n, {kDown, kDown, kTUp, kTDown}), P);
  for (int beta = 0; beta < N; ++beta) {
    SymField e = zeros(Shape(n, {kTUp}), P);
    e(beta) = P.one();
    const SymField dde = nabla(nabla(e));  // dde(a, b, A) = nabla_a nabla_b E^A
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int A = 0; A < N; ++A) om(a, b, A, beta) = dde(a, b, A) - dde(b, a, A);
  }
  return om;
}

std::vector<Identity> tractor_identities(const Tractor& tr) {
  const int n = tr.dimension();
  const int N = tr.rank();
  expr::Pool& P = tr.curvature().pool();
  std::vector<Identity> ids;

  auto dot = [&](const SymField& up, const SymField& low) {
    Expr acc = P.zero();
    for (int A = 0; A < N; ++A) acc += up(A) * low(A);
    SymField s = zeros(Shape(n, {}), P);
    s[0] = acc;
    return s;
  };
  auto scalar = [&](Expr e) {
    SymField s = zeros(Shape(n, {}), P);
    s[0] = e;
    return s;
  };
  ids.push_back({"injector_xx", "X^A X_A = 0", TolClass::Alg, dot(tr.X_upper(), tr.X_lower()), {}, {}});
  ids.push_back({"injector_yy", "Y^A Y_A = 0", TolClass::Alg, dot(tr.Y_upper(), tr.Y_lower()), {}, {}});
  ids.push_back({"injector_xy", "X^A Y_A = 1", TolClass::Alg, dot(tr.X_upper(), tr.Y_lower()), scalar(P.one()), {}});
  {
    SymField xz = zeros(Shape(n, {kUp}), P), yz = zeros(Shape(n, {kUp}), P);
    SymField zz = zeros(Shape(n, {kUp, kUp}), P);
    for (int a = 0; a < n; ++a) {
      Expr sx = P.zero(), sy = P.zero();
      for (int A = 0; A < N; ++A) {
        sx += tr.X_upper()(A) * tr.Z_lower()(A, a);
        sy += tr.Y_upper()(A) * tr.Z_lower()(A, a);
      }
      xz(a) = sx;
      yz(a) = sy;
      for (int b = 0; b < n; ++b) {
        Expr s = P.zero();
        for (int A = 0; A < N; ++A) s += tr.Z_upper()(A, a) * tr.Z_lower()(A, b);
        zz(a, b) = s;
      }
    }
    ids.push_back({"injector_xz", "X^A Z_A^a = 0", TolClass::Alg, xz, {}, {}});
    ids.push_back({"injector_yz", "Y^A Z_A^a = 0", TolClass::Alg, yz, {}, {}});
    ids.push_back({"injector_zz", "Z^Aa Z_A^b = g^ab", TolClass::Alg, zz, tr.curvature().inverse_metric(), {}});
  }

  ids.push_back({"tractor_metric_parallel", "nabla_a h_BC = 0", TolClass::Alg, tr.nabla(tr.metric()), {}, {}});

  const SymField formula = tr.curvature_formula();
  const SymField comm = tr.lower(tr.curvature_commutator(), 2);
  ids.push_back({"omega_formula_vs_commutator", "Omega_abAB = Z_A^c Z_B^d C_abcd - 2 X_[A Z_B]^c A_cab",
                 TolClass::Id, comm, formula, {}});
  {
    SymField swapped = zeros(comm.shape(), P);
    SymField form_swapped = zeros(comm.shape(), P);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int A = 0; A < N; ++A)
          for (int B = 0; B < N; ++B) {
            swapped(a, b, A, B) = -comm(a, b, B, A);
            form_swapped(a, b, A, B) = -comm(b, a, A, B);
          }
    ids.push_back({"omega_tractor_skew", "Omega_abAB = -Omega_abBA", TolClass::Alg, comm, swapped, {}});
    ids.push_back({"omega_form_skew", "Omega_abAB = -Omega_baAB", TolClass::Alg, comm, form_swapped, {}});
  }
  {
    SymField ox = zeros(Shape(n, {kDown, kDown, kTDown}), P);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int B = 0; B < N; ++B) {
          Expr acc = P.zero();
          for (int A = 0; A < N; ++A) acc += comm(a, b, A, B) * tr.X_upper()(A);
          ox(a, b, B) = acc;
        }
    ids.push_back({"omega_x", "Omega_abAB X^A = 0", TolClass::Alg, ox, {}, {comm}});
  }
  return ids;
}

int check_tractor_signature(const Tractor& tr, std::span<const double> points) {
  const int N = tr.rank();
  int want = 1;
  for (int s : tr.curvature().spec().signature) want += (s > 0);
  FieldEvaluator ev;
  const int hh = ev.add(tr.metric());
  ev.run(points);
  for (std::size_t p = 0; p < ev.points(); ++p) {
    const NumField h = ev.get(hh, p);
    Eigen::MatrixXd m(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) m(i, j) = h(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    int pos = 0;
    for (int i = 0; i < N; ++i) pos += es.eigenvalues()(i) > 0;
    if (pos != want) return static_cast<int>(p);
  }
  return -1;
}

}  // namespace feff
