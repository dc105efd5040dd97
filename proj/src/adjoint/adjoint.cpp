#include "feff/adjoint.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace feff {

using expr::Expr;

namespace {

SymField scalar_field(int n, Expr e) {
  SymField s = zeros(Shape(n, {}), *e.pool());
  s[0] = e;
  return s;
}

}  // namespace

Expr sparling_scalar(const Curvature& curv, const KappaJets& k) {
  const int n = curv.dimension();
  expr::Pool& P = curv.pool();
  Expr kpk = P.zero();
  Expr kdd = P.zero();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) kpk += k.upper(a) * curv.schouten()(a, b) * k.upper(b);
    kdd += k.upper(a) * k.grad_div(a);
  }
  return P.rational(1, n * n) * pow(k.div, 2) - kpk - P.rational(1, n) * kdd;
}

AdjointSection splitting(const Tractor& tr, const KappaJets& k) {
  const Curvature& curv = tr.curvature();
  const int n = curv.dimension();
  const int N = n + 2;
  expr::Pool& P = curv.pool();
  const SymField& gi = curv.inverse_metric();
  const Expr inv_n = P.rational(1, n);

  AdjointSection sec;
  sec.div = k.div;
  sec.K = zeros(Shape(n, {kTDown}), P);
  sec.K(tr.y_slot()) = -inv_n * k.div;  // X_B = delta_B^0
  for (int a = 0; a < n; ++a) sec.K(tr.z_slot(a)) = k.lower(a);
  sec.K_up = tr.raise(sec.K, 0);

  sec.nabla_K = tr.nabla(sec.K);
  const SymField nnK = tr.nabla(sec.nabla_K);  // nnK(a, b, B) = nabla_a nabla_b K_B
  const Expr J = curv.schouten_trace();

  sec.s = zeros(Shape(n, {kTDown, kTDown}), P);
  for (int B = 0; B < N; ++B) {
    sec.s(tr.x_slot(), B) = sec.K(B);  // Y_A = delta_A^{n+1}
    for (int a = 0; a < n; ++a) sec.s(tr.z_slot(a), B) = sec.nabla_K(a, B);
    Expr box = P.zero();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (!gi(a, b).is_zero()) box += gi(a, b) * nnK(a, b, B);
    sec.s(tr.y_slot(), B) = -inv_n * (box + J * sec.K(B));
  }
  sec.s_mixed = tr.raise(sec.s, 0);
  sec.s_up = tr.raise(sec.s_mixed, 1);
  sec.nabla_s = tr.nabla(sec.s);

  sec.ell = zeros(Shape(n, {kDown}), P);
  const Expr c = P.rational(-1, n - 1);
  for (int b = 0; b < n; ++b) {
    Expr box = P.zero();
    Expr pk = P.zero();
    for (int d = 0; d < n; ++d) {
      for (int a = 0; a < n; ++a)
        if (!gi(d, a).is_zero()) box += gi(d, a) * k.nabla2(d, a, b);
      pk += curv.schouten()(d, b) * k.upper(d);
    }
    sec.ell(b) = c * (box + J * k.lower(b) - pk);
  }
  sec.lambda = sparling_scalar(curv, k);
  return sec;
}

std::vector<Identity> adjoint_identities(const Tractor& tr, const KappaJets& k, const AdjointSection& sec) {
  const Curvature& curv = tr.curvature();
  const int n = curv.dimension();
  const int N = n + 2;
  expr::Pool& P = curv.pool();
  const SymField& g = curv.metric();
  const SymField& Ps = curv.schouten();
  const SymField& C = curv.weyl();
  const SymField& A = curv.cotton();
  const SymField om = tr.curvature_formula();
  const SymField om_mixed = tr.raise(om, 2);  // Omega_ab^A_B
  const Expr inv_n = P.rational(1, n);
  const bool preferred = curv.spec().scale == ScaleNote::Preferred;
  std::vector<Identity> ids;

  ids.push_back({"parallel", "nabla_a s_BC = 0", TolClass::Id, sec.nabla_s, {}, {sec.s}});

  {
    SymField swapped = zeros(sec.s.shape(), P);
    for (int x = 0; x < N; ++x)
      for (int y = 0; y < N; ++y) swapped(x, y) = -sec.s(y, x);
    ids.push_back({"adjoint_skew", "s_AB + s_BA = 0", TolClass::Alg, sec.s, swapped, {}});
  }
  {
    SymField xs = zeros(Shape(n, {kTDown}), P);
    for (int B = 0; B < N; ++B) {
      Expr acc = P.zero();
      for (int a = 0; a < N; ++a) acc += tr.X_upper()(a) * sec.s(a, B);
      xs(B) = acc;
    }
    ids.push_back({"x_s_equals_k", "X^A s_AB = K_B", TolClass::Alg, xs, sec.K, {}});
    // Z-slot of X^A s_AB lowered with Z_B^a picks kappa_a.
    SymField zk = zeros(Shape(n, {kDown}), P);
    for (int a = 0; a < n; ++a) zk(a) = xs(tr.z_slot(a));
    ids.push_back({"projection", "Z^B_a X^A s_AB = kappa_a", TolClass::Alg, zk, k.lower, {}});
  }

  {
    SymField ko = zeros(Shape(n, {kDown, kTDown, kTDown}), P);
    for (int b = 0; b < n; ++b)
      for (int x = 0; x < N; ++x)
        for (int y = 0; y < N; ++y) {
          Expr acc = P.zero();
          for (int a = 0; a < n; ++a) acc += k.upper(a) * om(a, b, x, y);
          ko(b, x, y) = acc;
        }
    ids.push_back({"kappa_omega", "kappa^a Omega_ab^A_B = 0", TolClass::Id, ko, {}, {om}});
  }
  {
    SymField os = zeros(Shape(n, {kDown, kDown}), P);
    SymField rhs = zeros(os.shape(), P);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Expr acc = P.zero();
        for (int x = 0; x < N; ++x)
          for (int y = 0; y < N; ++y)
            if (!om(a, b, x, y).is_zero()) acc += om(a, b, x, y) * sec.s_up(x, y);
        os(a, b) = acc;
        Expr r = P.zero();
        for (int c = 0; c < n; ++c) {
          r += P.constant(-2) * k.upper(c) * A(c, a, b);
          for (int d = 0; d < n; ++d) r += C(a, b, c, d) * k.nabla_up(c, d);
        }
        rhs(a, b) = r;
      }
    ids.push_back({"omega_s", "Omega_abAB s^AB = 0", TolClass::Id, os, {}, {om}});
    ids.push_back({"omega_s_reconstruction", "Omega_abAB s^AB = -2 kappa^c A_cab + C_abcd nabla^c kappa^d",
                   TolClass::Id, os, rhs, {}});
  }
  {
    SymField lhs = zeros(Shape(n, {kTDown}), P);
    SymField rhs = zeros(lhs.shape(), P);
    for (int c = 0; c < N; ++c) {
      Expr l = P.zero();
      for (int b = 0; b < N; ++b) l += sec.K_up(b) * sec.s(b, c);
      lhs(c) = l;
      Expr r = -inv_n * sec.K(c) * k.div;
      for (int a = 0; a < n; ++a) r += k.upper(a) * sec.nabla_K(a, c);
      rhs(c) = r;
    }
    ids.push_back({"k_s_identity", "K^B s_BC = -(1/n) K_C nabla_b kappa^b + kappa^a nabla_a K_C", TolClass::Id, lhs,
                   rhs, {}});
  }
  {
    // X^A s_A^C s_C^B X_B = s_{n+1,D} h^DC s_{C,n+1} since X^A = delta^A_{n+1}.
    Expr xssx = P.zero();
    const SymField& hi = tr.inverse_metric();
    for (int d = 0; d < N; ++d)
      for (int c = 0; c < N; ++c)
        if (!hi(d, c).is_zero()) xssx += sec.s(tr.x_slot(), d) * hi(d, c) * sec.s(c, tr.x_slot());
    ids.push_back({"x_ss_x", "X^A s_A^C s_C^B X_B = -kappa^a kappa_a", TolClass::Id, scalar_field(n, xssx),
                   scalar_field(n, -k.norm), {}});
  }
  {
    Expr ksy = P.zero();
    for (int b = 0; b < N; ++b) ksy += sec.K_up(b) * sec.s(b, tr.y_slot());  // Y^C = delta^C_0
    ids.push_back({"lambda_k_s_y", "K^B s_BC Y^C = lambda", TolClass::Id, scalar_field(n, ksy),
                   scalar_field(n, sec.lambda), {}});
    Expr tr2 = P.zero();
    for (int x = 0; x < N; ++x)
      for (int y = 0; y < N; ++y) tr2 += sec.s_mixed(x, y) * sec.s_mixed(y, x);
    Identity t{"lambda_trace", "tr(s o s) / (n+2) = lambda", TolClass::Id, scalar_field(n, P.rational(1, N) * tr2),
               scalar_field(n, sec.lambda), {}};
    t.diagnostic = true;
    ids.push_back(std::move(t));
  }
  {
    SymField ok = zeros(Shape(n, {kTUp, kTDown}), P);
    for (int x = 0; x < N; ++x)
      for (int y = 0; y < N; ++y) {
        Expr acc = P.zero();
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            if (!om_mixed(a, b, x, y).is_zero()) acc += om_mixed(a, b, x, y) * k.nabla_up(a, b);
        ok(x, y) = acc;
      }
    Identity l1{"lemma_omega_nabla_kappa", "Omega_ab^A_B nabla^a kappa^b = 0", TolClass::Id, ok, {}, {om}};
    l1.diagnostic = !preferred;
    ids.push_back(std::move(l1));

    SymField e = zeros(Shape(n, {kDown, kDown, kDown}), P);
    for (int d = 0; d < n; ++d)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          e(d, a, b) = k.nabla2(d, a, b) + Ps(d, a) * k.lower(b) - Ps(d, b) * k.lower(a) + g(d, a) * sec.ell(b) -
                       g(d, b) * sec.ell(a);
    Identity l2{"lemma_second_derivative", "nabla_d nabla_a kappa_b + 2 P_d[a kappa_b] + 2 g_d[a ell_b] = 0",
                TolClass::Id, e, {}, {k.nabla2}};
    l2.diagnostic = !preferred;
    ids.push_back(std::move(l2));
  }
  {
    Expr kpk = P.zero();
    Expr ric = P.zero();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        kpk += k.upper(a) * Ps(a, b) * k.upper(b);
        ric += k.upper(a) * curv.ricci()(a, b) * k.upper(b);
      }
    Identity kl{"killing_lambda", "lambda = -kappa^a P_ab kappa^b", TolClass::Id, scalar_field(n, sec.lambda),
                scalar_field(n, -kpk), {}};
    kl.diagnostic = true;
    ids.push_back(std::move(kl));
    Identity kr{"killing_ricci", "kappa^a P_ab kappa^b = Ric(kappa, kappa) / (n-2)", TolClass::Id, scalar_field(n, kpk),
                scalar_field(n, P.rational(1, n - 2) * ric), {}};
    kr.diagnostic = true;
    ids.push_back(std::move(kr));
  }
  return ids;
}

double parallel_residual(const Tractor&, const AdjointSection& sec, std::span<const double> points, int workers) {
  return max_abs_over(sec.nabla_s, points, workers);
}

LambdaStats lambda_stats(std::vector<double> values) {
  LambdaStats st;
  st.values = std::move(values);
  if (st.values.empty()) return st;
  st.min = *std::min_element(st.values.begin(), st.values.end());
  st.max = *std::max_element(st.values.begin(), st.values.end());
  double sum = 0.0;
  for (double v : st.values) sum += v;
  st.mean = sum / static_cast<double>(st.values.size());
  st.spread = st.max - st.min;
  return st;
}

AdjointNumerics adjoint_numerics(const Tractor& tr, const AdjointSection& sec, std::span<const double> points,
                                 double lambda_floor, int workers) {
  const int n = tr.dimension();
  const int N = n + 2;
  FieldEvaluator ev;
  const int hs = ev.add(sec.s_mixed);
  const int hl = ev.add(sec.lambda);
  const int ho = ev.add(tr.raise(tr.curvature_formula(), 2));
  ev.run(points, workers);

  AdjointNumerics out;
  std::vector<double> lam;
  std::vector<Eigen::MatrixXd> S;
  for (std::size_t p = 0; p < ev.points(); ++p) {
    lam.push_back(ev.scalar(hl, p));
    const NumField f = ev.get(hs, p);
    Eigen::MatrixXd m(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) m(i, j) = f(i, j);
    S.push_back(m);
  }
  out.lambda = lambda_stats(lam);

  bool all_negative = !S.empty();
  for (std::size_t p = 0; p < S.size(); ++p) {
    const Eigen::MatrixXd sq = S[p] * S[p];
    const double est = sq.trace() / N;
    out.square.lambda_est.push_back(est);
    const Eigen::MatrixXd dev = sq - est * Eigen::MatrixXd::Identity(N, N);
    out.square.residual = std::max(out.square.residual, dev.cwiseAbs().maxCoeff());
    out.square.max_abs = std::max(out.square.max_abs, sq.cwiseAbs().maxCoeff());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(S[p]);
    const auto& sv = svd.singularValues();
    const double cut = 1e-8 * sv(0);
    int kernel = 0;
    for (int i = 0; i < sv.size(); ++i) kernel += (sv(i) <= cut);
    out.square.kernel_dims.push_back(kernel);
    if (!(est < -lambda_floor)) all_negative = false;
  }

  out.complex.applicable = all_negative;
  if (all_negative) {
    for (std::size_t p = 0; p < S.size(); ++p) {
      const Eigen::MatrixXd J = S[p] / std::sqrt(-out.square.lambda_est[p]);
      out.complex.j_square_residual =
          std::max(out.complex.j_square_residual, (J * J + Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff());
      const NumField om = ev.get(ho, p);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double t = 0.0, jt = 0.0;
          for (int x = 0; x < N; ++x) {
            t += om(a, b, x, x);
            for (int y = 0; y < N; ++y) jt += om(a, b, x, y) * J(y, x);
          }
          out.complex.trace = std::max(out.complex.trace, std::abs(t));
          out.complex.j_trace = std::max(out.complex.j_trace, std::abs(jt));
        }
    }
  }
  return out;
}

std::optional<Eigen::MatrixXd> complex_structure(const Tractor& tr, const AdjointSection& sec,
                                                 std::span<const double> point, double lambda_floor) {
  const int N = tr.rank();
  FieldEvaluator ev;
  const int hs = ev.add(sec.s_mixed);
  ev.run(point);
  const NumField f = ev.get(hs, 0);
  Eigen::MatrixXd m(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) m(i, j) = f(i, j);
  const double est = (m * m).trace() / N;
  if (!(est < -lambda_floor)) return std::nullopt;
  return Eigen::MatrixXd(m / std::sqrt(-est));
}

}  // namespace feff
